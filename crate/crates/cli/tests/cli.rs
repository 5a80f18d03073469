use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kolab::ko::{Decision, Verdict};
use kolab::mapper::{map_to_cauchy, ExistenceVerdict, Family, MappedProblem, PdeSpec, RegimeReport};
use kolab::verify::VerifyReport;
use kolab::{CauchyParams, Nonlinearity, RegularityClass, SolveControl, Status};
use serde_json::Value;
use tempfile::tempdir;

fn kolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kolab"))
        .args(args)
        .env_remove("KOLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn solve_args<'a>(dir: &'a str, g: &'a str, horizon: &'a str) -> Vec<&'a str> {
    vec!["solve", "--C", "1", "--q", "0", "--tau", "1", "--theta", "1", "--g", g, "--a", "0", "--horizon", horizon, "--out", dir]
}

fn last_csv_row(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect()
}

#[test]
fn solve_parabola_writes_profile_and_status() {
    let dir = tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = kolab(&solve_args(d, "const:1", "2"));
    assert_eq!(out.status.code(), Some(0));
    let header = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(header.starts_with("r,v,vprime,accum\n"));
    let last = last_csv_row(&dir.path().join("profile.csv"));
    assert_eq!(last[0], 2.0);
    assert!((last[1] - 2.0).abs() < 1e-8);

    // status.json parses back into the library types
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("status.json")).unwrap()).unwrap();
    let status: Status = serde_json::from_value(v["status"].clone()).unwrap();
    assert_eq!(status, Status::Global { r_horizon: 2.0 });
    let params: CauchyParams = serde_json::from_value(v["params"].clone()).unwrap();
    assert_eq!(params, CauchyParams::new(1.0, 0.0, 1.0, 1.0).unwrap());
    let g: Nonlinearity = serde_json::from_value(v["g"].clone()).unwrap();
    assert_eq!(g, Nonlinearity::constant(1.0));
    let control: SolveControl = serde_json::from_value(v["control"].clone()).unwrap();
    assert_eq!(control, SolveControl::with_horizon(2.0));
    assert_eq!(stdout_json(&out), v);
}

#[test]
fn solve_exponential_reports_blow_up_with_exit_zero() {
    let dir = tempdir().unwrap();
    let out = kolab(&solve_args(dir.path().to_str().unwrap(), "exp:1", "10"));
    assert_eq!(out.status.code(), Some(0));
    let status: Status = serde_json::from_value(stdout_json(&out)["status"].clone()).unwrap();
    let Status::BlowUp { r_estimate, r_bracket } = status else { panic!("{status:?}") };
    assert!((r_estimate - 2.2214).abs() < 1e-3);
    assert!(r_bracket.0 <= r_estimate && r_estimate <= r_bracket.1);
}

#[test]
fn invalid_parameters_exit_two_and_name_the_invariant() {
    let dir = tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = kolab(&["solve", "--C", "1", "--tau", "0.5", "--theta", "1", "--q", "1", "--g", "pow:2", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tau") && err.contains("theta*q"), "{err}");
    assert_eq!(kolab(&["solve", "--C", "1", "--q", "0", "--tau", "1", "--theta", "1", "--g", "sin:1"]).status.code(), Some(2));
    assert_eq!(kolab(&["solve", "--q", "0", "--tau", "1", "--theta", "1", "--g", "pow:1"]).status.code(), Some(2));
    assert_eq!(kolab(&["bogus"]).status.code(), Some(2));
}

#[test]
fn aborted_run_exits_one() {
    let dir = tempdir().unwrap();
    let mut args = solve_args(dir.path().to_str().unwrap(), "const:1", "1000");
    args.extend(["--max-steps", "3"]);
    let out = kolab(&args);
    assert_eq!(out.status.code(), Some(1));
    let status: Status = serde_json::from_value(stdout_json(&out)["status"].clone()).unwrap();
    assert!(matches!(status, Status::Aborted { .. }));
}

#[test]
fn check_ko_borderline_power() {
    let out = kolab(&["check-ko", "--g", "pow:1", "--theta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Verdict = serde_json::from_value(stdout_json(&out)).unwrap();
    assert_eq!(v.decision, Decision::Diverges);

    let out = kolab(&["check-ko", "--g", "pow:3", "--theta", "1", "--tau", "0.5", "--q", "0"]);
    let j = stdout_json(&out);
    let kappa: Verdict = serde_json::from_value(j["kappa"].clone()).unwrap();
    assert_eq!(kappa.decision, Decision::Converges);
    assert_eq!(kolab(&["check-ko", "--g", "pow:1", "--theta", "1", "--tau", "2"]).status.code(), Some(2));
}

#[test]
fn map_reproduces_the_pik_row() {
    let out = kolab(&["map", "--family", "pik", "--n", "4", "--k", "2", "--p", "2", "--alpha", "0", "--beta", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let j = stdout_json(&out);
    let mapped: MappedProblem = serde_json::from_value(j["mapped"].clone()).unwrap();
    let spec: PdeSpec = serde_json::from_value(j["spec"].clone()).unwrap();
    assert_eq!(spec.family, Family::PiKHessian);
    assert_eq!(mapped, map_to_cauchy(&spec).unwrap());
    // C = n^{k/n}/k, q = k − 1, τ = n, θ = n/k
    assert_eq!((mapped.params.c, mapped.params.q, mapped.params.tau, mapped.params.theta), (1.0, 1.0, 4.0, 2.0));
    let _: RegimeReport = serde_json::from_value(j["regime"].clone()).unwrap();
    let _: ExistenceVerdict = serde_json::from_value(j["existence"].clone()).unwrap();

    let out = kolab(&["map", "--family", "kh", "--n", "3", "--k", "2", "--p", "2", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta < p - 1"));
}

#[test]
fn classify_case_two() {
    let out = kolab(&["classify", "--C", "1", "--q", "0", "--tau", "1", "--theta", "1", "--g", "exp:1", "--a", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r: RegularityClass = serde_json::from_value(stdout_json(&out)["regularity"].clone()).unwrap();
    assert_eq!(r.vpp_at_zero, Some(1.0));
}

#[test]
fn verify_examples() {
    let out = kolab(&["verify", "--example", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let j = stdout_json(&out);
    assert_eq!(j["passed"], Value::Bool(true));
    let rep: VerifyReport = serde_json::from_value(j["report"].clone()).unwrap();
    assert!(rep.min_slack.abs() < 1e-10);

    let out = kolab(&["verify", "--example", "1", "--margin", "0.99"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(kolab(&["verify", "--example", "9"]).status.code(), Some(2));

    let out = kolab(&[
        "verify", "--family", "pik", "--n", "3", "--k", "2", "--p", "2", "--profile", "quadratic:0.5", "--grid", "0.1:10:5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["report"]["grid_used"], Value::String("5 points in [1e-1, 1e1]".into()));
}

fn sweep_verdicts(args: &[&str]) -> Vec<String> {
    let out = kolab(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,beta,f,d,verdict,solve_status,R_or_horizon,agree"));
    lines.map(|l| l.split(',').nth(4).unwrap().to_string()).collect()
}

#[test]
fn sweep_power_and_exponential() {
    let base = ["sweep", "--family", "kh", "--n", "3", "--k", "2", "--p", "3", "--alphas", "0.5", "--betas", "0.5"];
    let mut pow = base.to_vec();
    pow.extend(["--d-factors", "0.5,1.0,1.5"]);
    assert_eq!(sweep_verdicts(&pow), ["yes", "yes", "no"]);
    let mut exp = base.to_vec();
    exp.extend(["--cs", "0,0.1"]);
    assert_eq!(sweep_verdicts(&exp), ["yes", "no"]);
    assert_eq!(kolab(&base).status.code(), Some(2));
}

#[test]
fn sweep_rows_keep_grid_order_and_record_failures() {
    let out = kolab(&[
        "sweep", "--family", "pik", "--n", "4", "--k", "2", "--p", "3", "--alphas", "-0.5,0,1", "--betas", "0.5,5",
        "--cs", "0", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r["alpha"].as_f64().unwrap(), r["beta"].as_f64().unwrap())).collect();
    assert_eq!(keys, [(-0.5, 0.5), (-0.5, 5.0), (0.0, 0.5), (0.0, 5.0), (1.0, 0.5), (1.0, 5.0)]);
    assert!(rows[1]["verdict"].as_str().unwrap().starts_with("error"));
    assert_eq!(rows[0]["agree"], "yes");
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(kolab(&solve_args(d.path().to_str().unwrap(), "pow:2", "5")).status.code(), Some(0));
    }
    for f in ["profile.csv", "status.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
    let args = ["sweep", "--family", "kh", "--n", "3", "--k", "2", "--p", "3", "--betas", "0,0.5", "--d-factors", "0.5,1.5"];
    assert_eq!(kolab(&args).stdout, kolab(&args).stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"C": 1, "q": 0, "tau": 1, "theta": 1, "g": "const:1", "a": 0, "horizon": 5}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = kolab(&[
        "solve", "--config", cfg.to_str().unwrap(), "--horizon", "2", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(last_csv_row(&out_dir.join("profile.csv"))[0], 2.0);

    fs::write(&cfg, r#"{"C": 1, "bogus": 3}"#).unwrap();
    assert_eq!(kolab(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn env_out_dir_is_honoured_but_flag_wins() {
    let (env_dir, flag_dir) = (tempdir().unwrap(), tempdir().unwrap());
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_kolab"))
            .args(["table", "--n", "4", "--k", "2", "--p", "3", "--format", "csv"])
            .args(extra)
            .env("KOLAB_OUT_DIR", env_dir.path())
            .output()
            .unwrap()
    };
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(env_dir.path().join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 9);
    fs::remove_file(env_dir.path().join("table.csv")).unwrap();
    run(&["--out", flag_dir.path().to_str().unwrap()]);
    assert!(flag_dir.path().join("table.csv").exists());
    assert!(!env_dir.path().join("table.csv").exists());
}

#[test]
fn tabulated_nonlinearity_from_file() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("g.csv");
    fs::write(&path, "t,g\n0,1\n10,1\n").unwrap();
    let spec = format!("table:{}", path.display());
    let out = kolab(&["check-ko", "--g", &spec, "--theta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Verdict = serde_json::from_value(stdout_json(&out)).unwrap();
    assert_eq!(v.decision, Decision::Diverges);
}
