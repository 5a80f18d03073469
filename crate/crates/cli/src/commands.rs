use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kolab::ko::{ko_kappa, ko_standard, Verdict};
use kolab::mapper::{existence_verdict, map_to_cauchy, regime, table_rows, ExistenceVerdict, Exists, Family, MappedProblem, PdeSpec, RegimeReport, TableRow};
use kolab::verify::{builtin_examples, default_grid, log_grid, verify_profile, RadialProfile, VerifyReport};
use kolab::{classify_regularity, solve, CauchyParams, Nonlinearity, RegularityClass, SolveControl, Status};

use crate::args::{need, CheckKoArgs, ClassifyArgs, FamilyArg, Format, PdeArgs, SolveArgs, SweepArgs, TableArgs, VerifyArgs};
use crate::grammar::{parse_list, parse_nonlinearity, parse_profile};
use crate::CliError;

/// Where artifacts go and how to emit them.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    /// Prints `text` and, when an output directory is set, also writes it to `name` there.
    fn emit(&self, name: &str, text: &str) -> Result<(), CliError> {
        print!("{text}");
        if let Some(dir) = &self.out {
            write_file(dir, name, text)?;
        }
        Ok(())
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

fn cauchy(c: Option<f64>, q: Option<f64>, tau: Option<f64>, theta: Option<f64>) -> Result<CauchyParams, CliError> {
    Ok(CauchyParams::new(need(c, "C")?, need(q, "q")?, need(tau, "tau")?, need(theta, "theta")?)?)
}

/// Contents of `status.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub params: CauchyParams,
    pub g: Nonlinearity,
    pub a: f64,
    pub control: SolveControl,
    pub points: usize,
    pub status: Status,
}

pub fn solve_cmd(args: SolveArgs, sink: &Sink) -> Result<u8, CliError> {
    let params = cauchy(args.c, args.q, args.tau, args.theta)?;
    let g = parse_nonlinearity(&need(args.g, "g")?)?;
    let a = args.a.unwrap_or(0.0);
    let mut control = SolveControl::with_horizon(args.horizon.unwrap_or(10.0));
    if let Some(t) = args.rel_tol {
        control.rel_tol = t;
    }
    if let Some(t) = args.abs_tol {
        control.abs_tol = t;
    }
    if let Some(m) = args.max_steps {
        control.max_steps = m;
    }
    let prof = solve(&params, &g, a, &control)?;
    let dir = sink.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut csv = Vec::new();
    prof.write_csv(&mut csv).map_err(|e| CliError::io(e.to_string()))?;
    write_file(&dir, "profile.csv", &String::from_utf8(csv).expect("csv is utf-8"))?;
    let summary = SolveSummary { params, g, a, control, points: prof.len(), status: prof.status.clone() };
    let text = json(&summary);
    write_file(&dir, "status.json", &text)?;
    print!("{text}");
    Ok(match prof.status {
        Status::Aborted { .. } => 1,
        _ => 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoReport {
    #[serde(flatten)]
    pub standard: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa: Option<Verdict>,
}

pub fn check_ko_cmd(args: CheckKoArgs, sink: &Sink) -> Result<u8, CliError> {
    let g = parse_nonlinearity(&need(args.g, "g")?)?;
    let theta = need(args.theta, "theta")?;
    if !(theta > 0.0) {
        return Err(CliError::config(format!("theta = {theta} must be positive")));
    }
    let kappa = match (args.tau, args.q) {
        (Some(tau), Some(q)) => Some(ko_kappa(&g, theta, tau, q, args.eps)?),
        (None, None) => None,
        _ => return Err(CliError::config("the kappa condition needs both --tau and --q")),
    };
    sink.emit("ko.json", &json(&KoReport { standard: ko_standard(&g, theta), kappa }))?;
    Ok(0)
}

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::Kh => Family::KHessian,
        FamilyArg::Pik => Family::PiKHessian,
    }
}

fn pde_spec(args: &PdeArgs) -> Result<PdeSpec, CliError> {
    let spec = PdeSpec {
        family: family(need(args.family, "family")?),
        n: need(args.n, "n")?,
        k: need(args.k, "k")?,
        p: need(args.p, "p")?,
        alpha: args.alpha.unwrap_or(0.0),
        beta: args.beta.unwrap_or(0.0),
        f: parse_nonlinearity(args.f.as_deref().unwrap_or("const:1"))?,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub spec: PdeSpec,
    pub mapped: MappedProblem,
    pub regime: RegimeReport,
    pub existence: ExistenceVerdict,
}

pub fn map_cmd(args: PdeArgs, sink: &Sink) -> Result<u8, CliError> {
    let spec = pde_spec(&args)?;
    let report = MapReport {
        mapped: map_to_cauchy(&spec)?,
        regime: regime(&spec)?,
        existence: existence_verdict(&spec)?,
        spec,
    };
    sink.emit("map.json", &json(&report))?;
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub params: CauchyParams,
    pub g: Nonlinearity,
    pub a: f64,
    pub regularity: RegularityClass,
}

pub fn classify_cmd(args: ClassifyArgs, sink: &Sink) -> Result<u8, CliError> {
    let params = cauchy(args.c, args.q, args.tau, args.theta)?;
    let g = parse_nonlinearity(args.g.as_deref().unwrap_or("const:1"))?;
    let a = args.a.unwrap_or(0.0);
    let regularity = classify_regularity(&params, &g, a);
    sink.emit("classify.json", &json(&ClassifyReport { params, g, a, regularity }))?;
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub example: Option<u32>,
    pub spec: PdeSpec,
    pub profile: RadialProfile,
    pub report: VerifyReport,
    pub passed: bool,
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::config(format!("grid `{s}` should be <lo>:<hi>:<count>"));
    let [lo, hi, count] = parts.as_slice() else { return Err(bad()) };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return Err(CliError::config(format!("grid `{s}` needs 0 < lo <= hi and count >= 1")));
    }
    Ok(log_grid(lo, hi, count))
}

pub fn verify_cmd(args: VerifyArgs, sink: &Sink) -> Result<u8, CliError> {
    let (spec, profile) = match args.example {
        Some(id) => {
            let ex = builtin_examples()
                .into_iter()
                .find(|e| e.id == id && e.margin == 1.0)
                .ok_or_else(|| CliError::config(format!("no built-in example {id} (1..=6)")))?;
            let m = args.margin.unwrap_or(1.0);
            (ex.spec, ex.profile.rescaled(m))
        }
        None => (pde_spec(&args.pde)?, parse_profile(&need(args.profile, "profile")?)?),
    };
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(),
    };
    let report = verify_profile(&spec, &profile, &grid)?;
    let passed = report.passed();
    sink.emit("verify.json", &json(&VerifyOutput { example: args.example, spec, profile, report, passed }))?;
    Ok(if passed { 0 } else { 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    /// Nonlinearity in the command-line grammar.
    pub f: String,
    /// Family parameter of `f` (exponent or rate).
    pub d: f64,
    pub verdict: String,
    pub solve_status: String,
    #[serde(rename = "R_or_horizon")]
    pub r_or_horizon: Option<f64>,
    /// `yes`, `no` (flagged disagreement) or `n/a`.
    pub agree: String,
}

impl SweepRow {
    fn ok(&self) -> bool {
        !self.verdict.starts_with("error")
    }

    fn csv_line(&self) -> String {
        let r = self.r_or_horizon.map(|x| x.to_string()).unwrap_or_default();
        let verdict = self.verdict.replace(',', ";");
        format!("{},{},{},{},{},{},{},{}\n", self.alpha, self.beta, self.f, self.d, verdict, self.solve_status, r, self.agree)
    }
}

const SWEEP_HEADER: &str = "alpha,beta,f,d,verdict,solve_status,R_or_horizon,agree\n";

fn sweep_row(base: &PdeSpec, alpha: f64, beta: f64, f: &Nonlinearity, horizon: f64) -> SweepRow {
    let (label, d) = match *f {
        Nonlinearity::Power { d } => (format!("pow:{d}"), d),
        Nonlinearity::Exponential { c } => (format!("exp:{c}"), c),
        _ => unreachable!("sweeps cover the power and exponential families"),
    };
    let mut row = SweepRow {
        alpha,
        beta,
        f: label,
        d,
        verdict: String::new(),
        solve_status: "skipped".into(),
        r_or_horizon: None,
        agree: "n/a".into(),
    };
    let spec = PdeSpec { alpha, beta, f: f.clone(), ..base.clone() };
    let verdict = match existence_verdict(&spec) {
        Ok(v) => v.exists,
        Err(e) => {
            row.verdict = format!("error: {e}");
            return row;
        }
    };
    row.verdict = match verdict {
        Exists::Yes => "yes",
        Exists::No => "no",
        Exists::Conditional => "conditional",
    }
    .into();
    let outcome = map_to_cauchy(&spec).and_then(|mp| solve(&mp.params, &mp.g, 1.0, &SolveControl::with_horizon(horizon)));
    match outcome {
        Ok(prof) => {
            row.solve_status = match prof.status {
                Status::Global { .. } => "global",
                Status::BlowUp { .. } => "blowup",
                Status::Aborted { .. } => "aborted",
            }
            .into();
            row.r_or_horizon = prof.status.radius();
            row.agree = match (verdict, &prof.status) {
                (Exists::Yes, Status::Global { .. }) | (Exists::No, Status::BlowUp { .. }) => "yes",
                (Exists::Conditional, _) | (_, Status::Aborted { .. }) => "n/a",
                _ => "no",
            }
            .into();
        }
        Err(e) => row.solve_status = format!("error: {e}").replace(',', ";"),
    }
    row
}

pub fn sweep_cmd(args: SweepArgs, sink: &Sink) -> Result<u8, CliError> {
    let base = PdeSpec {
        family: family(need(args.family, "family")?),
        n: need(args.n, "n")?,
        k: need(args.k, "k")?,
        p: need(args.p, "p")?,
        alpha: 0.0,
        beta: 0.0,
        f: Nonlinearity::exponential(0.0),
    };
    let alphas = parse_list(args.alphas.as_deref().unwrap_or("0"))?;
    let betas = parse_list(args.betas.as_deref().unwrap_or("0"))?;
    let factors = parse_list(args.d_factors.as_deref().unwrap_or(""))?;
    let ds = parse_list(args.ds.as_deref().unwrap_or(""))?;
    let cs = parse_list(args.cs.as_deref().unwrap_or(""))?;
    let horizon = args.horizon.unwrap_or(1e3);
    if !(horizon > 0.0) {
        return Err(CliError::config(format!("horizon = {horizon} must be positive")));
    }

    let mut jobs = Vec::new();
    for &alpha in &alphas {
        for &beta in &betas {
            let m = base.p - beta - 1.0;
            let fs = factors
                .iter()
                .map(|s| Nonlinearity::power(s * m))
                .chain(ds.iter().map(|&d| Nonlinearity::power(d)))
                .chain(cs.iter().map(|&c| Nonlinearity::exponential(c)));
            jobs.extend(fs.map(|f| (alpha, beta, f)));
        }
    }
    if jobs.is_empty() {
        return Err(CliError::config("sweep grid is empty: give alphas, betas and at least one of d-factors, ds, cs"));
    }
    info!("sweeping {} rows", jobs.len());
    // collect keeps the grid order regardless of completion order
    let rows: Vec<SweepRow> = jobs.par_iter().map(|(a, b, f)| sweep_row(&base, *a, *b, f, horizon)).collect();
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = SWEEP_HEADER.to_string();
            rows.iter().for_each(|r| s.push_str(&r.csv_line()));
            s
        }
        Format::Json => json(&rows),
    };
    let name = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => "sweep.csv",
        Format::Json => "sweep.json",
    };
    sink.emit(name, &text)?;
    Ok(if rows.iter().any(SweepRow::ok) { 0 } else { 1 })
}

pub fn table_cmd(args: TableArgs, sink: &Sink) -> Result<u8, CliError> {
    let rows = table_rows(
        need(args.n, "n")?,
        need(args.k, "k")?,
        need(args.p, "p")?,
        args.alpha.unwrap_or(0.0),
        args.beta.unwrap_or(0.0),
    )?;
    match args.format.unwrap_or_default() {
        Format::Json => sink.emit("table.json", &json(&rows))?,
        Format::Csv => {
            let mut s = String::from("equation,family,p,alpha,beta,C,q,tau,theta,g_exponent\n");
            for TableRow { equation, family, p, alpha, beta, c, q, tau, theta, g_exponent } in &rows {
                s.push_str(&format!("{equation},{family:?},{p},{alpha},{beta},{c},{q},{tau},{theta},{g_exponent}\n"));
            }
            sink.emit("table.csv", &s)?;
        }
    }
    Ok(0)
}
