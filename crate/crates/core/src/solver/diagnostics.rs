//! Consistency checks on computed profiles and independent oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ko::{ko_standard, Decision};
use crate::nonlinearity::Nonlinearity;
use crate::params::{approx_eq, CauchyParams};
use crate::profile::SolutionProfile;
use crate::quadrature::integrate;

/// Derivative of `f` at the middle of three unevenly spaced points.
fn three_point(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// `|L − R| / (1 + |R|)` for `L = sign·e^{ln_l}` and `R = e^{ln_r}`, without overflow.
fn scaled_gap(sign: f64, ln_l: f64, ln_r: f64) -> f64 {
    let m = ln_l.max(ln_r).max(0.0);
    let l = if sign == 0.0 { 0.0 } else { sign * (ln_l - m).exp() };
    let r = (ln_r - m).exp();
    (l - r).abs() / ((-m).exp() + r)
}

/// Relative residual of `v''(v')^{θ−1} + (q/r)(v')^θ = (C^θ/θ) r^{τ−θq−1} g(v)`
/// at every interior grid point.
pub fn residual_identity(profile: &SolutionProfile, params: &CauchyParams, g: &Nonlinearity) -> f64 {
    residual_identity_on(profile, params, g, f64::NEG_INFINITY, f64::INFINITY)
}

/// As [`residual_identity`], restricted to grid points in `[r_lo, r_hi]`.
pub fn residual_identity_on(
    profile: &SolutionProfile,
    params: &CauchyParams,
    g: &Nonlinearity,
    r_lo: f64,
    r_hi: f64,
) -> f64 {
    let CauchyParams { c, q, tau, theta } = *params;
    let ln_coef = theta * c.ln() - theta.ln();
    let x = &profile.grid;
    let mut worst: f64 = 0.0;
    for i in 1..x.len().saturating_sub(1) {
        let r = x[i];
        if r < r_lo || r > r_hi {
            continue;
        }
        let vp = profile.vprime[i];
        let vpp = three_point(
            [x[i - 1], r, x[i + 1]],
            [profile.vprime[i - 1], vp, profile.vprime[i + 1]],
        );
        let ln_rhs = ln_coef + (tau - theta * q - 1.0) * r.ln() + g.ln_eval(profile.v[i]);
        // LHS = (v')^{θ−1} (v'' + q v'/r)
        let bracket = vpp + q * vp / r;
        let res = if vp == 0.0 {
            if bracket == 0.0 && ln_rhs == f64::NEG_INFINITY {
                0.0
            } else {
                let lhs = if theta >= 1.0 { 0.0 } else { f64::INFINITY };
                (lhs - ln_rhs.exp()).abs() / (1.0 + ln_rhs.exp())
            }
        } else {
            let sign = if bracket == 0.0 { 0.0 } else { bracket.signum() };
            let ln_l = (theta - 1.0) * vp.ln() + bracket.abs().ln();
            scaled_gap(sign, ln_l, ln_rhs)
        };
        worst = worst.max(res);
    }
    worst
}

/// One extrapolated limit against its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub estimate: f64,
    pub target: f64,
    pub rel_error: f64,
}

impl LimitCheck {
    fn new(estimate: f64, target: f64) -> Self {
        let rel_error = if target == 0.0 { estimate.abs() } else { ((estimate - target) / target).abs() };
        LimitCheck { estimate, target, rel_error }
    }
}

/// Limits of `v'/r^s`, `v''/r^{s−1}` and, when requested, `(v')^{p−1}/r` as `r → 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub vprime: LimitCheck,
    pub vsecond: LimitCheck,
    pub p_power: Option<LimitCheck>,
}

/// Extrapolates the small-`r` limits from a profile by Richardson's rule.
pub fn limit_checks(
    profile: &SolutionProfile,
    params: &CauchyParams,
    g: &Nonlinearity,
    a: f64,
    p: Option<f64>,
) -> Result<LimitReport> {
    let CauchyParams { c, q, tau, theta } = *params;
    if let Some(p) = p {
        if !(p > 1.0) {
            return Err(Error::InvalidParams(format!("p = {p} must exceed 1")));
        }
        if !approx_eq(tau, theta * (q + 1.0 / (p - 1.0))) {
            return Err(Error::LimitUnavailable(format!(
                "(v')^(p-1)/r has a finite nonzero limit only when tau = theta*(q + 1/(p-1)) = {}, got tau = {tau}",
                theta * (q + 1.0 / (p - 1.0))
            )));
        }
    }
    let x = &profile.grid;
    let (Some(&first), Some(&last)) = (x.first(), x.last()) else {
        return Err(Error::InvalidParams("empty profile".into()));
    };
    if first > 1e-3 * last {
        return Err(Error::InvalidParams(format!(
            "profile starts at r = {first:e}, too far from the origin for r_end = {last:e}"
        )));
    }

    let g_a = g.eval(a);
    let s = params.vprime_exponent();
    // first correction to the power law comes from g(v) − g(a) ~ r^{s+1}
    let beta = s + 1.0;

    let pick = |target: f64| -> usize {
        let j = x.partition_point(|&r| r < target);
        j.clamp(1, x.len() - 2)
    };
    let i1 = pick(1e-3 * last);
    let i2 = pick(2e-3 * last).max(i1 + 1).min(x.len() - 2);
    if i2 <= i1 {
        return Err(Error::InvalidParams("profile too coarse near the origin".into()));
    }
    let (r1, r2) = (x[i1], x[i2]);
    let richardson = |f1: f64, f2: f64| {
        let (w1, w2) = (r1.powf(beta), r2.powf(beta));
        (f1 * w2 - f2 * w1) / (w2 - w1)
    };

    let ratio_a = |i: usize| profile.vprime[i] / x[i].powf(s);
    let vprime = LimitCheck::new(richardson(ratio_a(i1), ratio_a(i2)), params.leading_coeff(g_a));

    let vpp = |i: usize| three_point([x[i - 1], x[i], x[i + 1]], [profile.vprime[i - 1], profile.vprime[i], profile.vprime[i + 1]]);
    let ratio_b = |i: usize| vpp(i) / x[i].powf(s - 1.0);
    let target_b = c * (1.0 / theta - q / tau) * tau.powf(1.0 - 1.0 / theta) * g_a.powf(1.0 / theta);
    let vsecond = LimitCheck::new(richardson(ratio_b(i1), ratio_b(i2)), target_b);

    let p_power = p.map(|p| {
        let e = p - 1.0;
        let ratio_c = |i: usize| profile.vprime[i].powf(e) / x[i];
        let target = c.powf(e) * (g_a / tau).powf(e / theta);
        LimitCheck::new(richardson(ratio_c(i1), ratio_c(i2)), target)
    });

    Ok(LimitReport { vprime, vsecond, p_power })
}

/// Blow-up radius predicted by the first integral, or `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "R")]
pub enum OracleRadius {
    Finite(f64),
    Infinite,
}

/// For `θ = 1, q = 0, τ = 1` the problem is `v'' = C g(v)`, `v'(0) = 0`, whose
/// first integral gives `R = ∫ₐ^∞ dv / √(2C ∫ₐᵛ g)`.
pub fn energy_oracle_radius(c: f64, g: &Nonlinearity, a: f64) -> Result<OracleRadius> {
    g.validate()?;
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!("C = {c} must be positive")));
    }
    if g.eval(a) <= 0.0 {
        return Ok(OracleRadius::Infinite);
    }
    if ko_standard(g, 1.0).decision == Decision::Diverges {
        return Ok(OracleRadius::Infinite);
    }
    // w = (a/v)^{d+1} turns the integral into a Beta function; quadrature cannot
    // resolve the t^{-1+(d-1)/2}-type tail when d is close to 1
    if let Nonlinearity::Power { d } = *g {
        let x = (d - 1.0) / (2.0 * (d + 1.0));
        let beta = libm::tgamma(x) * std::f64::consts::PI.sqrt() / libm::tgamma(x + 0.5);
        return Ok(OracleRadius::Finite(a.powf(0.5 * (1.0 - d)) * beta / (2.0 * c * (d + 1.0)).sqrt()));
    }
    // v = a + s², then s = 1/t on the tail
    let f = |s: f64| {
        if s == 0.0 {
            return 2.0 / (2.0 * c * g.eval(a)).sqrt();
        }
        let d = g.integral(a, a + s * s);
        if d.is_infinite() {
            return 0.0;
        }
        2.0 * s / (2.0 * c * d).sqrt()
    };
    let head = integrate(f, 0.0, 1.0, 1e-13, 1e-12)?;
    let tail = integrate(
        |t: f64| if t == 0.0 { 0.0 } else { f(1.0 / t) / (t * t) },
        0.0,
        1.0,
        1e-13,
        1e-12,
    )?;
    Ok(OracleRadius::Finite(head.value + tail.value))
}

/// Admissible mesh widths `(δ₁, δ₂)` that make the Euler polygon an
/// ε-approximate solution on `[r̄, l]` for the two ranges of `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepBounds {
    pub delta1: f64,
    pub delta2: f64,
}

pub fn euler_step_bounds(
    params: &CauchyParams,
    g: &Nonlinearity,
    a: f64,
    eps: f64,
    l: f64,
    r_bar: f64,
    h: f64,
) -> Result<StepBounds> {
    if !(eps > 0.0 && l > 0.0 && r_bar > 0.0 && r_bar < l && h > 0.0) {
        return Err(Error::InvalidParams("need eps, h > 0 and 0 < r_bar < l".into()));
    }
    let CauchyParams { c, q, tau, theta } = *params;
    let gah = g.eval(a + h);
    let delta1 = tau * r_bar.powf(q * theta + 1.0) / (l.powf(tau - 1.0) * (q * theta * l + tau * r_bar) * gah)
        * (eps / c).powf(theta);
    let delta2 = theta * r_bar.powf(q + 1.0) * tau.powf(1.0 / theta) * eps
        / (c * l.powf(tau / theta - 1.0) * gah.powf(1.0 / theta) * (tau * r_bar + theta * q * l));
    Ok(StepBounds { delta1, delta2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Status;
    use approx::assert_relative_eq;

    fn exact_parabola(n: usize) -> SolutionProfile {
        let mut p = SolutionProfile::empty(0.0);
        for i in 1..=n {
            let r = 2.0 * i as f64 / n as f64;
            p.push(r, r * r / 2.0, r, r);
        }
        p.status = Status::Global { r_horizon: 2.0 };
        p
    }

    fn lap1() -> CauchyParams {
        CauchyParams::new(1.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn residual_of_exact_profile_vanishes() {
        let p = exact_parabola(200);
        assert!(residual_identity(&p, &lap1(), &Nonlinearity::constant(1.0)) < 1e-12);
    }

    #[test]
    fn residual_detects_perturbation() {
        let mut p = exact_parabola(200);
        for vp in p.vprime.iter_mut() {
            *vp *= 1.1;
        }
        assert!(residual_identity(&p, &lap1(), &Nonlinearity::constant(1.0)) >= 0.05);
    }

    #[test]
    fn scaled_gap_survives_overflow() {
        assert!(scaled_gap(1.0, 1000.0, 1000.0) < 1e-15);
        assert_relative_eq!(scaled_gap(1.0, 1000.0 + 0.1f64.ln_1p(), 1000.0), 0.1, max_relative = 1e-12);
    }

    #[test]
    fn oracle_exponential() {
        let OracleRadius::Finite(r) = energy_oracle_radius(1.0, &Nonlinearity::exponential(1.0), 0.0).unwrap() else {
            panic!()
        };
        assert_relative_eq!(r, std::f64::consts::PI / 2f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn oracle_powers() {
        // reference values from independent quadrature
        let cases = [(2.0, 2.9744774254021387), (3.0, 1.8540746773014007)];
        for (d, want) in cases {
            let OracleRadius::Finite(r) = energy_oracle_radius(1.0, &Nonlinearity::power(d), 1.0).unwrap() else {
                panic!()
            };
            assert_relative_eq!(r, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn oracle_infinite() {
        assert_eq!(energy_oracle_radius(1.0, &Nonlinearity::constant(1.0), 0.0).unwrap(), OracleRadius::Infinite);
        assert_eq!(energy_oracle_radius(1.0, &Nonlinearity::power(1.0), 1.0).unwrap(), OracleRadius::Infinite);
    }

    #[test]
    fn oracle_near_critical_power() {
        // slowly convergent tail; reference from 40-digit quadrature
        let g = Nonlinearity::power(1.0090640301650267);
        let OracleRadius::Finite(r) = energy_oracle_radius(1.0, &g, 1.0371361792369018).unwrap() else {
            panic!()
        };
        assert_relative_eq!(r, 221.80599031095819, max_relative = 1e-12);
    }

    #[test]
    fn limit_c_needs_its_gate() {
        let p = CauchyParams::new(1.0, 0.0, 2.0, 1.0).unwrap();
        let prof = exact_parabola(10);
        let err = limit_checks(&prof, &p, &Nonlinearity::constant(1.0), 0.0, Some(2.0)).unwrap_err();
        assert!(matches!(err, Error::LimitUnavailable(_)));
    }

    #[test]
    fn step_bounds_shrink_with_eps() {
        let p = CauchyParams::new(1.0, 1.0, 3.0, 1.0).unwrap();
        let g = Nonlinearity::exponential(1.0);
        let b1 = euler_step_bounds(&p, &g, 0.0, 1e-2, 1.0, 0.1, 1e-3).unwrap();
        let b2 = euler_step_bounds(&p, &g, 0.0, 1e-3, 1.0, 0.1, 1e-3).unwrap();
        assert!(b2.delta1 < b1.delta1 && b2.delta2 < b1.delta2);
        assert!(b1.delta1 > 0.0 && b1.delta2 > 0.0);
    }
}
