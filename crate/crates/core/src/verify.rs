//! Pointwise check that closed-form radial profiles are admissible entire subsolutions.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::{binomial_f64, Family, PdeSpec};
use crate::nonlinearity::Nonlinearity;
use crate::operators::{in_gamma_k, in_p_k, ln_pik_normalized_radial, ln_sk_normalized_radial, EigenVector};

/// Relative slack tolerance.
pub const TOL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum RadialProfile {
    /// `a r²/2 + j`
    Quadratic { a: f64, j: f64 },
    /// `a r⁴/4 + j`
    Quartic { a: f64, j: f64 },
    /// `(2a/3) r^{3/2} + j`
    PowerThreeHalves { a: f64, j: f64 },
    /// `exp(A r²/2)`
    ExpQuadratic {
        #[serde(rename = "A")]
        a: f64,
    },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        let a = self.coefficient();
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParams(format!("profile coefficient must be positive, got {a}")));
        }
        match self {
            RadialProfile::Quadratic { j, .. }
            | RadialProfile::Quartic { j, .. }
            | RadialProfile::PowerThreeHalves { j, .. }
                if !j.is_finite() =>
            {
                Err(Error::InvalidParams("offset j must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn coefficient(&self) -> f64 {
        match *self {
            RadialProfile::Quadratic { a, .. }
            | RadialProfile::Quartic { a, .. }
            | RadialProfile::PowerThreeHalves { a, .. }
            | RadialProfile::ExpQuadratic { a } => a,
        }
    }

    /// Same form with the coefficient multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> RadialProfile {
        match *self {
            RadialProfile::Quadratic { a, j } => RadialProfile::Quadratic { a: a * s, j },
            RadialProfile::Quartic { a, j } => RadialProfile::Quartic { a: a * s, j },
            RadialProfile::PowerThreeHalves { a, j } => RadialProfile::PowerThreeHalves { a: a * s, j },
            RadialProfile::ExpQuadratic { a } => RadialProfile::ExpQuadratic { a: a * s },
        }
    }

    /// `v' = a r^m` for the polynomial-type forms.
    fn power_m(&self) -> Option<f64> {
        match self {
            RadialProfile::Quadratic { .. } => Some(1.0),
            RadialProfile::Quartic { .. } => Some(3.0),
            RadialProfile::PowerThreeHalves { .. } => Some(0.5),
            RadialProfile::ExpQuadratic { .. } => None,
        }
    }

    pub fn v(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Quadratic { a, j } => 0.5 * a * r * r + j,
            RadialProfile::Quartic { a, j } => 0.25 * a * r.powi(4) + j,
            RadialProfile::PowerThreeHalves { a, j } => 2.0 * a / 3.0 * r.powf(1.5) + j,
            RadialProfile::ExpQuadratic { a } => (0.5 * a * r * r).exp(),
        }
    }

    pub fn vprime(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::ExpQuadratic { a } => a * r * self.v(r),
            _ => self.coefficient() * r.powf(self.power_m().unwrap_or(1.0)),
        }
    }

    pub fn vpp(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::ExpQuadratic { a } => a * self.v(r) * (1.0 + a * r * r),
            _ => {
                let m = self.power_m().unwrap_or(1.0);
                self.coefficient() * m * r.powf(m - 1.0)
            }
        }
    }

    fn ln_v(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::ExpQuadratic { a } => 0.5 * a * r * r,
            _ => self.v(r).ln(),
        }
    }

    fn ln_vprime(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::ExpQuadratic { a } => a.ln() + r.ln() + 0.5 * a * r * r,
            _ => self.coefficient().ln() + self.power_m().unwrap_or(1.0) * r.ln(),
        }
    }

    /// `v''/v'`, finite wherever `v' > 0`.
    fn curvature_ratio(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::ExpQuadratic { a } => (1.0 + a * r * r) / r,
            _ => self.power_m().unwrap_or(1.0) / r,
        }
    }

    /// `ln f(v(r))`, kept finite when `v` itself overflows.
    fn ln_f(&self, f: &Nonlinearity, r: f64) -> f64 {
        match self {
            RadialProfile::ExpQuadratic { .. } => f.ln_eval_shifted(0.0, self.ln_v(r)),
            _ => f.ln_eval(self.v(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub admissible_everywhere: bool,
    /// Smallest `(LHS − RHS)/RHS` over the grid.
    pub min_slack: f64,
    /// Radius at which `min_slack` was attained.
    pub worst_r: f64,
    pub grid_used: String,
    pub analytic_note: Option<String>,
    /// Coefficient threshold when the slack reduces to an `r`-independent inequality.
    pub analytic_threshold: Option<f64>,
    /// Grid points dropped because the operator is singular there.
    pub skipped: Vec<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.admissible_everywhere && self.min_slack >= -TOL_SLACK
    }
}

/// 64 log-spaced radii in `[1e-3, 1e3]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 64)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == count => hi,
            _ => (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

fn ln_operator(family: Family, mu1: f64, mu2: f64, n: usize, k: usize) -> Result<f64> {
    match family {
        Family::KHessian => ln_sk_normalized_radial(mu1, mu2, n, k),
        Family::PiKHessian => ln_pik_normalized_radial(mu1, mu2, n, k),
    }
}

/// `f` when it is a positive constant on the whole line.
fn constant_value(f: &Nonlinearity) -> Option<f64> {
    match *f {
        Nonlinearity::Constant { g0 } => Some(g0),
        Nonlinearity::Exponential { c: 0.0 } => Some(1.0),
        _ => None,
    }
}

fn analytic_reduction(spec: &PdeSpec, prof: &RadialProfile) -> Result<(Option<String>, Option<f64>)> {
    let (n, k) = (spec.n as usize, spec.k as usize);
    let p = spec.p;
    if let RadialProfile::ExpQuadratic { a } = *prof {
        let d = match spec.f {
            Nonlinearity::Power { d } => d,
            Nonlinearity::Exponential { c: 0.0 } => 0.0,
            _ => return Ok((None, None)),
        };
        let kf = k as f64;
        if spec.family == Family::PiKHessian && p == 2.0 && spec.alpha == 0.0 && spec.beta == 0.0 && (0.0..=1.0).contains(&d) {
            let note = format!(
                "LHS = A v k^((n-k)/n) (k + A r^2)^(k/n) >= kA v >= v >= v^d (v >= 1, d <= 1) once kA >= 1; kA = {}",
                kf * a
            );
            return Ok((Some(note), Some(1.0 / kf)));
        }
        return Ok((None, None));
    }
    let Some(f0) = constant_value(&spec.f) else {
        return Ok((None, None));
    };
    let m = prof.power_m().unwrap_or(1.0);
    let a = prof.coefficient();
    // v' = a r^m: LHS = N a^{p−1} r^{m(p−1)−1}, RHS = f0 a^β r^{α+mβ}
    let e_lhs = m * (p - 1.0) - 1.0;
    let e_rhs = spec.alpha + m * spec.beta;
    let mu1 = (p - 1.0) * m;
    let lnn = ln_operator(spec.family, mu1, 1.0, n, k)?;
    if (e_lhs - e_rhs).abs() <= 1e-12 * (1.0 + e_lhs.abs()) {
        let thr = ((f0.ln() - lnn) / (p - 1.0 - spec.beta)).exp();
        let note = format!(
            "slack is r-independent: {:.12} a^{} >= {} a^{}, i.e. a >= {:.12e}; a = {:.12e}",
            lnn.exp(),
            p - 1.0,
            f0,
            spec.beta,
            thr,
            a
        );
        Ok((Some(note), Some(thr)))
    } else {
        let note = format!(
            "LHS ~ r^{e_lhs} but RHS ~ r^{e_rhs}; the inequality fails near {} for every coefficient",
            if e_lhs > e_rhs { "r = 0" } else { "r = infinity" }
        );
        Ok((Some(note), None))
    }
}

/// Evaluates `F[D(|Dv|^{p−2}Dv)]` against `r^α (v')^β f(v)` on the grid.
pub fn verify_profile(spec: &PdeSpec, prof: &RadialProfile, grid: &[f64]) -> Result<VerifyReport> {
    spec.validate()?;
    prof.validate()?;
    if grid.is_empty() || grid.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
        return Err(Error::InvalidParams("verification grid must be nonempty and strictly positive".into()));
    }
    let (n, k) = (spec.n as usize, spec.k as usize);
    let p = spec.p;
    let mut admissible = true;
    let mut min_slack = f64::INFINITY;
    let mut worst_r = f64::NAN;
    let mut skipped = Vec::new();

    for &r in grid {
        let vp = prof.vprime(r);
        if vp == 0.0 && p < 2.0 {
            warn!("skipping r = {r:e}: (v')^(p-2) is singular");
            skipped.push(r);
            continue;
        }
        // eigenvalues are W·μ with W = (v')^{p−1} > 0, μ = ((p−1)v''/v', 1/r, …, 1/r)
        let mu1 = (p - 1.0) * prof.curvature_ratio(r);
        let mu2 = 1.0 / r;
        let mut mu = vec![mu2; n];
        mu[0] = mu1;
        let ev = EigenVector::new(mu);
        let in_cone = match spec.family {
            Family::KHessian => in_gamma_k(&ev, k),
            Family::PiKHessian => in_p_k(&ev, k),
        };
        if !in_cone {
            admissible = false;
            continue;
        }
        let ln_lhs = (p - 1.0) * prof.ln_vprime(r) + ln_operator(spec.family, mu1, mu2, n, k)?;
        let ln_rhs = spec.alpha * r.ln() + spec.beta * prof.ln_vprime(r) + prof.ln_f(&spec.f, r);
        let slack = if ln_rhs == f64::NEG_INFINITY { f64::INFINITY } else { (ln_lhs - ln_rhs).exp_m1() };
        if slack < min_slack || worst_r.is_nan() {
            min_slack = slack;
            worst_r = r;
        }
    }
    let (analytic_note, analytic_threshold) = analytic_reduction(spec, prof)?;
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(0.0, f64::max);
    Ok(VerifyReport {
        admissible_everywhere: admissible,
        min_slack,
        worst_r,
        grid_used: format!("{} points in [{lo:e}, {hi:e}]", grid.len()),
        analytic_note,
        analytic_threshold,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinExample {
    pub id: u32,
    /// Coefficient multiple of the stated threshold (1 or 2).
    pub margin: f64,
    pub spec: PdeSpec,
    pub profile: RadialProfile,
    /// Stated coefficient threshold.
    pub threshold: f64,
    /// What the source claims.
    pub expected_pass: bool,
    pub note: Option<String>,
}

fn example_at(id: u32, margin: f64) -> BuiltinExample {
    let n = 3u32;
    let pik = |k: u32, p: f64, alpha: f64, beta: f64, f: Nonlinearity| PdeSpec {
        family: Family::PiKHessian,
        n,
        k,
        p,
        alpha,
        beta,
        f,
    };
    let flat = Nonlinearity::exponential(0.0);
    let (spec, threshold, profile_of, note): (PdeSpec, f64, fn(f64) -> RadialProfile, Option<String>) = match id {
        1 => {
            let k = 2;
            (pik(k, 2.0, 0.0, 0.0, flat), 1.0 / k as f64, |a| RadialProfile::Quadratic { a, j: 0.0 }, None)
        }
        2 => {
            let k = 2;
            (
                pik(k, 2.0, 0.0, 0.0, Nonlinearity::power(1.0)),
                1.0 / k as f64,
                |a| RadialProfile::ExpQuadratic { a },
                None,
            )
        }
        3 => {
            let k = 2;
            (
                pik(k, 2.0, 2.0, -2.0, flat),
                (1.0 / k as f64).powf(1.0 / 3.0),
                |a| RadialProfile::Quadratic { a, j: 0.0 },
                None,
            )
        }
        4 => {
            let k = n;
            let c = binomial_f64(n, k);
            let thr = ((k as f64 + 0.5) * binomial_f64(n - 1, k - 1) + k as f64 * binomial_f64(n - 1, k)).powi(-3);
            (
                pik(k, 1.5, 0.0, 1.0 / (6.0 * c), flat),
                thr,
                |a| RadialProfile::Quartic { a, j: 0.0 },
                Some("instantiated with k = n; for k < n the two sides scale differently in r".into()),
            )
        }
        5 => {
            let k = 2;
            let c = binomial_f64(n, k);
            let thr = ((k as f64 + 4.5) * binomial_f64(n - 1, k - 1) + k as f64 * binomial_f64(n - 1, k)).powf(-0.5);
            let delta_hi = (10.0 * c - 9.0) / (9.0 * (c - 1.0));
            (
                pik(k, 11.0, 0.0, 9.0 / c, flat),
                thr,
                |a| RadialProfile::PowerThreeHalves { a, j: 0.0 },
                Some(format!(
                    "C^2 away from the origin and W^(2,delta)_loc for delta in (1, {delta_hi})"
                )),
            )
        }
        6 => (
            pik(n, 1.5, -0.5, 1.0 / 3.0, flat),
            (n as f64 + 0.5).powi(-6),
            |a| RadialProfile::Quartic { a, j: 0.0 },
            None,
        ),
        _ => unreachable!("example ids run 1..=6"),
    };
    BuiltinExample { id, margin, profile: profile_of(threshold * margin), spec, threshold, expected_pass: true, note }
}

/// The six worked examples at their thresholds, followed by the same six at twice the threshold.
pub fn builtin_examples() -> Vec<BuiltinExample> {
    [1.0, 2.0].iter().flat_map(|&m| (1..=6).map(move |id| example_at(id, m))).collect()
}
