//! The quadruple `(C, q, τ, θ)` and the regularity split at the origin.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// Relative tolerance for float equality of regime boundaries.
pub const EQ_REL_TOL: f64 = 1e-12;

/// `x == y` up to a relative tolerance of [`EQ_REL_TOL`].
pub fn approx_eq(x: f64, y: f64) -> bool {
    let scale = x.abs().max(y.abs());
    (x - y).abs() <= EQ_REL_TOL * scale || x == y
}

/// Parameters of `v' = C r^{-q} (∫₀ʳ s^{τ-1} g(v) ds)^{1/θ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub q: f64,
    pub tau: f64,
    pub theta: f64,
}

impl CauchyParams {
    pub fn new(c: f64, q: f64, tau: f64, theta: f64) -> Result<Self> {
        let p = CauchyParams { c, q, tau, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let CauchyParams { c, q, tau, theta } = *self;
        if ![c, q, tau, theta].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if c <= 0.0 {
            return Err(Error::InvalidParams(format!("C = {c} must be positive")));
        }
        if q < 0.0 {
            return Err(Error::InvalidParams(format!("q = {q} must be nonnegative")));
        }
        if theta <= 0.0 {
            return Err(Error::InvalidParams(format!("theta = {theta} must be positive")));
        }
        if tau <= theta * q {
            return Err(Error::InvalidParams(format!(
                "tau = {tau} must exceed theta*q = {}",
                theta * q
            )));
        }
        Ok(())
    }

    /// `τ − θq > 0`.
    pub fn gap(&self) -> f64 {
        self.tau - self.theta * self.q
    }

    /// Exponent `s` in `v'(r) ~ c₀ r^s` near the origin.
    pub fn vprime_exponent(&self) -> f64 {
        self.gap() / self.theta
    }

    /// `C (g(a)/τ)^{1/θ}`, the leading coefficient of `v'` at the origin.
    pub fn leading_coeff(&self, g_a: f64) -> f64 {
        self.c * (g_a / self.tau).powf(1.0 / self.theta)
    }

    /// Whether the entire-solution dichotomy applies directly (`τ ≥ θq + 1`).
    pub fn is_ko_regime(&self) -> bool {
        self.gap() >= 1.0 || approx_eq(self.gap(), 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    I,
    II,
    III,
}

/// Smoothness of the local solution at `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityClass {
    pub case_tag: CaseTag,
    pub vpp_at_zero: Option<f64>,
    pub delta_range: Option<(f64, f64)>,
}

/// Case from the sign of `τ − θ(q+1)`, with a relative equality band.
pub fn case_of(q: f64, tau: f64, theta: f64) -> CaseTag {
    let edge = theta * (q + 1.0);
    if approx_eq(tau, edge) {
        CaseTag::II
    } else if tau > edge {
        CaseTag::I
    } else {
        CaseTag::III
    }
}

/// Case computed exactly on rational inputs.
pub fn case_of_exact(q: &BigRational, tau: &BigRational, theta: &BigRational) -> CaseTag {
    let edge = theta * (q + BigRational::one());
    let diff = tau - edge;
    if diff.is_zero() {
        CaseTag::II
    } else if diff.is_positive() {
        CaseTag::I
    } else {
        CaseTag::III
    }
}

/// Classifies regularity at the origin for initial value `a`.
pub fn classify_regularity(params: &CauchyParams, g: &Nonlinearity, a: f64) -> RegularityClass {
    let CauchyParams { q, tau, theta, .. } = *params;
    match case_of(q, tau, theta) {
        CaseTag::I => RegularityClass { case_tag: CaseTag::I, vpp_at_zero: Some(0.0), delta_range: None },
        CaseTag::II => RegularityClass {
            case_tag: CaseTag::II,
            vpp_at_zero: Some(params.leading_coeff(g.eval(a))),
            delta_range: None,
        },
        CaseTag::III => RegularityClass {
            case_tag: CaseTag::III,
            vpp_at_zero: None,
            delta_range: Some((1.0, theta / (theta * (q + 1.0) - tau))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(CauchyParams::new(1.0, 1.0, 0.5, 1.0).is_err());
        assert!(CauchyParams::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(CauchyParams::new(1.0, -0.1, 1.0, 1.0).is_err());
        assert!(CauchyParams::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(CauchyParams::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(CauchyParams::new(1.0, 1.0, 1.5, 1.0).is_ok());
    }

    #[test]
    fn regularity_cases() {
        let one = Nonlinearity::constant(1.0);
        let r = classify_regularity(&CauchyParams::new(1.0, 0.0, 3.0, 1.0).unwrap(), &one, 0.0);
        assert_eq!(r.case_tag, CaseTag::I);
        assert_eq!(r.vpp_at_zero, Some(0.0));

        let r = classify_regularity(&CauchyParams::new(1.0, 0.0, 1.0, 1.0).unwrap(), &one, 0.0);
        assert_eq!(r.case_tag, CaseTag::II);
        assert_eq!(r.vpp_at_zero, Some(1.0));

        let r = classify_regularity(&CauchyParams::new(1.0, 1.0, 1.5, 1.0).unwrap(), &one, 0.0);
        assert_eq!(r.case_tag, CaseTag::III);
        assert_eq!(r.delta_range, Some((1.0, 2.0)));
    }

    #[test]
    fn float_equality_band() {
        // θ(q+1) = 0.1*3 is not exactly 0.3 in binary
        assert_eq!(case_of(2.0, 0.3, 0.1), CaseTag::II);
        assert_eq!(case_of(2.0, 0.3 + 1e-9, 0.1), CaseTag::I);
    }

    #[test]
    fn exact_cases() {
        assert_eq!(case_of_exact(&rat(2, 1), &rat(3, 10), &rat(1, 10)), CaseTag::II);
        assert_eq!(case_of_exact(&rat(1, 1), &rat(3, 2), &rat(1, 1)), CaseTag::III);
        assert_eq!(case_of_exact(&rat(0, 1), &rat(3, 1), &rat(1, 1)), CaseTag::I);
    }

    #[test]
    fn json_uses_capital_c() {
        let p = CauchyParams::new(2.0, 0.0, 1.0, 1.0).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains(r#""C":2.0"#));
        assert_eq!(serde_json::from_str::<CauchyParams>(&s).unwrap(), p);
    }
}
