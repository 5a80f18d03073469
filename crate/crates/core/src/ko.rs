//! Convergence of the Keller–Osserman integrals
//! `∫^∞ G(t)^{−1/(θ+1)} dt` and its κ-modified variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Evidence {
    ClosedForm { family: String },
    TailExponent { estimate: f64, stderr: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub evidence: Evidence,
}

impl Verdict {
    fn closed(decision: Decision, g: &Nonlinearity) -> Self {
        Verdict { decision, evidence: Evidence::ClosedForm { family: g.family().to_string() } }
    }

    /// Thresholds a fitted integrand exponent at 1 with a dead-band.
    pub fn from_tail(estimate: f64, stderr: f64) -> Self {
        let band = 3.0 * stderr + DEAD_BAND;
        let decision = if estimate > 1.0 + band {
            Decision::Converges
        } else if estimate < 1.0 - band {
            Decision::Diverges
        } else {
            Decision::Inconclusive
        };
        Verdict { decision, evidence: Evidence::TailExponent { estimate, stderr } }
    }

    fn inconclusive() -> Self {
        Verdict { decision: Decision::Inconclusive, evidence: Evidence::None }
    }
}

/// Absolute slack around the borderline exponent 1.
pub const DEAD_BAND: f64 = 0.02;
const TAIL_POINTS: usize = 48;
const TAIL_DECADES: f64 = 4.0;

/// Verdict on `∫^∞ (∫₀ᵗ g)^{−1/(θ+1)} dt`.
pub fn ko_standard(g: &Nonlinearity, theta: f64) -> Verdict {
    match g {
        Nonlinearity::Constant { .. } => Verdict::closed(Decision::Diverges, g),
        Nonlinearity::Exponential { c } => {
            Verdict::closed(if *c > 0.0 { Decision::Converges } else { Decision::Diverges }, g)
        }
        Nonlinearity::Power { d } => Verdict::closed(if *d <= theta { Decision::Diverges } else { Decision::Converges }, g),
        Nonlinearity::Tabulated { .. } => match tail_exponent(g, theta) {
            Ok((est, se)) => Verdict::from_tail(est, se),
            Err(_) => Verdict::inconclusive(),
        },
    }
}

/// The admissible `ε` and the resulting `κ = (1−ε)/(τ−θq−ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSpec {
    pub epsilon: f64,
    pub kappa: f64,
}

impl KappaSpec {
    /// `ε` defaults to the midpoint `(τ−θq)/2`.
    pub fn new(theta: f64, tau: f64, q: f64, eps: Option<f64>) -> Result<Self> {
        let gap = tau - theta * q;
        if !(gap > 0.0 && gap < 1.0) {
            return Err(Error::InvalidParams(format!(
                "kappa condition needs theta*q < tau < theta*q + 1, got tau - theta*q = {gap}"
            )));
        }
        let epsilon = eps.unwrap_or(0.5 * gap);
        if !(epsilon > 0.0 && epsilon < gap) {
            return Err(Error::InvalidParams(format!("eps = {epsilon} must lie in (0, {gap})")));
        }
        Ok(KappaSpec { epsilon, kappa: (1.0 - epsilon) / (gap - epsilon) })
    }
}

/// Verdict on `∫^∞ (∫₀ᵗ g^κ)^{−1/(κθ+1)} dt`.
pub fn ko_kappa(g: &Nonlinearity, theta: f64, tau: f64, q: f64, eps: Option<f64>) -> Result<Verdict> {
    let ks = KappaSpec::new(theta, tau, q, eps)?;
    let kappa = ks.kappa;
    Ok(match g {
        Nonlinearity::Constant { .. } => Verdict::closed(Decision::Diverges, g),
        Nonlinearity::Exponential { c } => {
            Verdict::closed(if *c > 0.0 { Decision::Converges } else { Decision::Diverges }, g)
        }
        // κ cancels: (κd + 1)/(κθ + 1) ≤ 1 iff d ≤ θ
        Nonlinearity::Power { d } => Verdict::closed(if *d <= theta { Decision::Diverges } else { Decision::Converges }, g),
        Nonlinearity::Tabulated { knots } => {
            let t0 = tail_start(g);
            let expo = 1.0 / (kappa * theta + 1.0);
            let fit = fit_tail(t0, |t| Ok(-expo * table_power_integral(knots, kappa, t)?.ln()));
            match fit {
                Ok((est, se)) => Verdict::from_tail(est, se),
                Err(_) => Verdict::inconclusive(),
            }
        }
    })
}

/// Exponent `e` in `G(t)^{−1/(θ+1)} ~ t^{−e}` from a log-log regression.
pub fn tail_exponent(g: &Nonlinearity, theta: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParams(format!("theta = {theta} must be positive")));
    }
    let expo = 1.0 / (theta + 1.0);
    fit_tail(tail_start(g), |t| Ok(-expo * g.ln_antideriv(t)))
}

/// Left end of the regression window: inside the table's data when there is one.
fn tail_start(g: &Nonlinearity) -> f64 {
    match g {
        Nonlinearity::Tabulated { knots } => {
            let last = knots.last().map(|k| k.0).unwrap_or(1.0);
            (last / 10f64.powf(TAIL_DECADES)).max(1.0)
        }
        _ => 1.0,
    }
}

/// Least-squares slope of `ln F` against `ln t` on `[t0, 10⁴·t0]`; returns `(−slope, stderr)`.
fn fit_tail<F: Fn(f64) -> Result<f64>>(t0: f64, ln_f: F) -> Result<(f64, f64)> {
    let n = TAIL_POINTS;
    let lt0 = t0.ln();
    let span = TAIL_DECADES * std::f64::consts::LN_10;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let x = lt0 + span * i as f64 / (n - 1) as f64;
        let y = ln_f(x.exp())?;
        if !y.is_finite() {
            return Err(Error::InvalidParams(format!("integrand not finite at t = {:e}", x.exp())));
        }
        xs.push(x);
        ys.push(y);
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok((-slope, stderr))
}

/// `∫₀ᵗ ĝ(s)^κ ds` for the interpolated table `ĝ`.
fn table_power_integral(knots: &[(f64, f64)], kappa: f64, t: f64) -> Result<f64> {
    let (x0, y0) = knots[0];
    let (xn, yn) = knots[knots.len() - 1];
    let interp = Nonlinearity::Tabulated { knots: knots.to_vec() };
    let mut total = 0.0;
    if 0.0 < x0 {
        total += y0.powf(kappa) * (t.min(x0) - 0.0).max(0.0);
    }
    for w in knots.windows(2) {
        let lo = w[0].0.max(0.0);
        let hi = w[1].0.min(t);
        if hi > lo {
            total += integrate(|s| interp.eval(s).powf(kappa), lo, hi, 1e-300, 1e-12)?.value;
        }
    }
    if t > xn {
        total += yn.powf(kappa) * (t - xn.max(0.0));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_rules() {
        assert_eq!(ko_standard(&Nonlinearity::exponential(1.0), 1.0).decision, Decision::Converges);
        assert_eq!(ko_standard(&Nonlinearity::exponential(0.0), 3.0).decision, Decision::Diverges);
        assert_eq!(ko_standard(&Nonlinearity::power(2.0), 2.0).decision, Decision::Diverges);
        assert_eq!(ko_standard(&Nonlinearity::power(2.5), 2.0).decision, Decision::Converges);
        assert_eq!(ko_standard(&Nonlinearity::constant(5.0), 0.1).decision, Decision::Diverges);
    }

    #[test]
    fn tail_exponents_of_powers() {
        let (e, _) = tail_exponent(&Nonlinearity::power(1.0), 1.0).unwrap();
        assert_relative_eq!(e, 1.0, max_relative = 1e-10);
        let (e, _) = tail_exponent(&Nonlinearity::constant(1.0), 1.0).unwrap();
        assert_relative_eq!(e, 0.5, max_relative = 1e-10);
        let (e, _) = tail_exponent(&Nonlinearity::power(3.0), 1.0).unwrap();
        assert_relative_eq!(e, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn tail_fit_agrees_for_supercritical_power() {
        let theta = 1.3;
        let (e, se) = tail_exponent(&Nonlinearity::power(theta + 0.5), theta).unwrap();
        assert_eq!(Verdict::from_tail(e, se).decision, Decision::Converges);
    }

    #[test]
    fn kappa_examples() {
        let v = ko_kappa(&Nonlinearity::exponential(1.0), 1.0, 0.5, 0.0, Some(0.25)).unwrap();
        assert_eq!(v.decision, Decision::Converges);
        let v = ko_kappa(&Nonlinearity::constant(1.0), 1.0, 0.5, 0.0, None).unwrap();
        assert_eq!(v.decision, Decision::Diverges);
        let v = ko_kappa(&Nonlinearity::power(2.0), 2.0, 0.7, 0.0, None).unwrap();
        assert_eq!(v.decision, Decision::Diverges);
    }

    #[test]
    fn kappa_rejects_bad_eps() {
        assert!(ko_kappa(&Nonlinearity::constant(1.0), 1.0, 0.5, 0.0, Some(0.5)).is_err());
        assert!(ko_kappa(&Nonlinearity::constant(1.0), 1.0, 0.5, 0.0, Some(0.0)).is_err());
        assert!(ko_kappa(&Nonlinearity::constant(1.0), 1.0, 1.5, 0.0, None).is_err());
    }

    #[test]
    fn kappa_value() {
        let ks = KappaSpec::new(1.0, 0.5, 0.0, None).unwrap();
        assert_eq!(ks.epsilon, 0.25);
        assert_relative_eq!(ks.kappa, 3.0, max_relative = 1e-15);
    }

    #[test]
    fn tabulated_growth_is_read_from_the_table() {
        // t³ sampled on [0, 1e6]: KO converges for θ = 1
        let knots: Vec<(f64, f64)> = (0..=600).map(|i| {
            let t = if i == 0 { 0.0 } else { 10f64.powf(i as f64 / 100.0) };
            (t, t.powi(3))
        }).collect();
        let g = Nonlinearity::tabulated(knots).unwrap();
        let v = ko_standard(&g, 1.0);
        assert_eq!(v.decision, Decision::Converges, "{v:?}");
        // t^{1/2}: diverges
        let knots: Vec<(f64, f64)> = (0..=600).map(|i| {
            let t = if i == 0 { 0.0 } else { 10f64.powf(i as f64 / 100.0) };
            (t, t.sqrt())
        }).collect();
        let g = Nonlinearity::tabulated(knots).unwrap();
        assert_eq!(ko_standard(&g, 1.0).decision, Decision::Diverges);
        let v = ko_kappa(&g, 1.0, 0.5, 0.0, None).unwrap();
        assert_eq!(v.decision, Decision::Diverges, "{v:?}");
    }

    #[test]
    fn verdict_json() {
        let v = ko_standard(&Nonlinearity::power(1.0), 1.0);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains(r#""decision":"Diverges""#));
        assert_eq!(serde_json::from_str::<Verdict>(&s).unwrap(), v);
    }
}
