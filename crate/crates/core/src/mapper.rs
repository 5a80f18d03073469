//! Radial reduction of the k-Hessian and Π_k-Hessian equations
//! `F[D(|Du|^{p−2}Du)] = |x|^α |Du|^β f(u)` to `(C, q, τ, θ, g)`.

use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ko::{ko_kappa, ko_standard, Decision, Verdict};
use crate::nonlinearity::Nonlinearity;
use crate::params::{approx_eq, case_of, case_of_exact, classify_regularity, CaseTag, CauchyParams, RegularityClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    KHessian,
    PiKHessian,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::KHessian => Family::PiKHessian,
            Family::PiKHessian => Family::KHessian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSpec {
    pub family: Family,
    pub n: u32,
    pub k: u32,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub f: Nonlinearity,
}

impl PdeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams("dimension n must be at least 1".into()));
        }
        if self.k < 1 || self.k > self.n {
            return Err(Error::InvalidParams(format!("k = {} must lie in 1..={}", self.k, self.n)));
        }
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::InvalidParams(format!("standing assumption p > 1 violated: p = {}", self.p)));
        }
        if !(self.alpha.is_finite() && self.alpha > -1.0) {
            return Err(Error::InvalidParams(format!(
                "standing assumption alpha > -1 violated: alpha = {}",
                self.alpha
            )));
        }
        if !(self.beta.is_finite() && self.beta < self.p - 1.0) {
            return Err(Error::InvalidParams(format!(
                "standing assumption beta < p - 1 violated: beta = {}, p - 1 = {}",
                self.beta,
                self.p - 1.0
            )));
        }
        self.f.validate()
    }

    /// Power of `f` entering `g`: `k` for k-Hessian, `n/k` for Π_k.
    pub fn g_exponent(&self) -> f64 {
        match self.family {
            Family::KHessian => self.k as f64,
            Family::PiKHessian => self.n as f64 / self.k as f64,
        }
    }

    /// `α` at which the entire-solution dichotomy starts to apply.
    pub fn alpha_critical(&self) -> f64 {
        match self.family {
            Family::KHessian => 1.0 / self.k as f64 - 1.0,
            Family::PiKHessian => self.k as f64 / self.n as f64 - 1.0,
        }
    }
}

/// `C(n, k)` in exact arithmetic; zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `C(n, k)` as a float.
pub fn binomial_f64(n: u32, k: u32) -> f64 {
    let b = binomial(n, k);
    b.to_string().parse().unwrap_or(f64::INFINITY)
}

/// Arithmetic shared by the float and exact-rational evaluations.
pub trait Field:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn int(i: i64) -> Self;
}

impl Field for f64 {
    fn int(i: i64) -> Self {
        i as f64
    }
}

impl Field for BigRational {
    fn int(i: i64) -> Self {
        BigRational::from_integer(BigInt::from(i))
    }
}

/// `(q, τ, θ)` of the reduced problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponents<T> {
    pub q: T,
    pub tau: T,
    pub theta: T,
}

pub fn exponents<T: Field>(family: Family, n: u32, k: u32, p: &T, alpha: &T, beta: &T) -> Exponents<T> {
    let n_ = T::int(n as i64);
    let k_ = T::int(k as i64);
    let one = T::int(1);
    let pm1 = p.clone() - one.clone();
    let pb1 = p.clone() - beta.clone() - one.clone();
    match family {
        Family::KHessian => Exponents {
            q: (n_.clone() - k_.clone()) / (k_.clone() * pm1.clone()),
            tau: k_.clone() * alpha.clone() + (k_.clone() - n_.clone()) * beta.clone() / pm1 + n_,
            theta: k_ * pb1,
        },
        Family::PiKHessian => Exponents {
            q: (k_.clone() - one.clone()) / pm1.clone(),
            tau: n_.clone()
                * (alpha.clone() / k_.clone() + (one.clone() / k_.clone() - one.clone()) * beta.clone() / pm1 + one),
            theta: n_ * pb1 / k_,
        },
    }
}

/// `K = C^θ`, the constant in front of the integral before taking the root.
pub fn amplitude_power(family: Family, n: u32, k: u32, p: f64, beta: f64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    match family {
        Family::KHessian => kf * (p - beta - 1.0) / (binomial_f64(n - 1, k - 1) * (p - 1.0)),
        Family::PiKHessian => nf * (p - beta - 1.0) / (kf.powf(nf / kf) * (p - 1.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Regime {
    /// `α` at or above critical: the plain condition decides existence.
    AboveCritical,
    /// `α` below critical; any `ε ∈ (0, eps_upper)` gives `κ ∈ (kappa_lower, ∞)`.
    BelowCritical { eps_upper: f64, kappa_lower: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedProblem {
    pub params: CauchyParams,
    pub g_exponent: f64,
    /// `f` raised to `g_exponent`.
    pub g: Nonlinearity,
    pub regime: Regime,
    /// Regularity at the origin for the initial value `a = 1`.
    pub regularity: RegularityClass,
}

/// Applies the radial reduction.
pub fn map_to_cauchy(spec: &PdeSpec) -> Result<MappedProblem> {
    spec.validate()?;
    let ex = exponents(spec.family, spec.n, spec.k, &spec.p, &spec.alpha, &spec.beta);
    let big_k = amplitude_power(spec.family, spec.n, spec.k, spec.p, spec.beta);
    let params = CauchyParams { c: big_k.powf(1.0 / ex.theta), q: ex.q, tau: ex.tau, theta: ex.theta };
    params.validate()?;
    let g_exponent = spec.g_exponent();
    let g = spec.f.powf(g_exponent);
    let regime = regime_of(spec, &params);
    let regularity = classify_regularity(&params, &g, 1.0);
    Ok(MappedProblem { params, g_exponent, g, regime, regularity })
}

fn above_critical(spec: &PdeSpec) -> bool {
    let ac = spec.alpha_critical();
    spec.alpha > ac || approx_eq(spec.alpha, ac)
}

fn regime_of(spec: &PdeSpec, params: &CauchyParams) -> Regime {
    if above_critical(spec) {
        Regime::AboveCritical
    } else {
        let gap = params.gap();
        Regime::BelowCritical { eps_upper: gap, kappa_lower: 1.0 / gap }
    }
}

/// Everything the existence regimes branch on for one specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub alpha_critical: f64,
    pub regime: Regime,
    pub case_tag: CaseTag,
    pub delta_range: Option<(f64, f64)>,
    /// `(p−1)α + β ≥ 0`, reported in case III where it is required.
    pub gradient_weight_nonneg: Option<bool>,
}

pub fn regime(spec: &PdeSpec) -> Result<RegimeReport> {
    let mp = map_to_cauchy(spec)?;
    let edge = spec.alpha + spec.beta + 2.0;
    let case_tag = if approx_eq(spec.p, edge) {
        CaseTag::II
    } else if spec.p < edge {
        CaseTag::I
    } else {
        CaseTag::III
    };
    let (delta_range, gradient_weight_nonneg) = match case_tag {
        CaseTag::III => {
            let upper = (spec.p - spec.beta - 1.0) / (spec.p - spec.alpha - spec.beta - 2.0);
            let w = (spec.p - 1.0) * spec.alpha + spec.beta;
            (Some((1.0, upper)), Some(w >= 0.0 || approx_eq(w, 0.0) || w.abs() < 1e-12))
        }
        _ => (None, None),
    };
    Ok(RegimeReport { alpha_critical: spec.alpha_critical(), regime: mp.regime, case_tag, delta_range, gradient_weight_nonneg })
}

/// The same equation in the other family with `k' = n/k`, when `k | n`.
pub fn duality_partner(spec: &PdeSpec) -> Option<PdeSpec> {
    if spec.k == 0 || !spec.n.is_multiple_of(spec.k) {
        return None;
    }
    Some(PdeSpec { family: spec.family.other(), k: spec.n / spec.k, ..spec.clone() })
}

/// Whether the limit of `(v')^{p−1}/r` at the origin exists for the mapped problem.
pub fn gradient_gate(spec: &PdeSpec) -> Result<bool> {
    let mp = map_to_cauchy(spec)?;
    let CauchyParams { q, tau, theta, .. } = mp.params;
    Ok(approx_eq(tau, theta * (q + 1.0 / (spec.p - 1.0))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exists {
    Yes,
    No,
    Conditional,
}

/// Which implication produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Plain condition is necessary and sufficient.
    KoEquivalence,
    /// κ-condition diverges, which suffices.
    KappaSufficient,
    /// Plain condition converges, which rules existence out.
    KoNecessary,
    /// Neither implication fires.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceVerdict {
    pub exists: Exists,
    pub basis: Basis,
    pub ko: Verdict,
    pub kappa_ko: Option<Verdict>,
    /// False when the regularity case needs `(p−1)α + β ≥ 0` and it fails.
    pub hypotheses_met: bool,
}

/// Existence of an entire admissible subsolution.
pub fn existence_verdict(spec: &PdeSpec) -> Result<ExistenceVerdict> {
    let mp = map_to_cauchy(spec)?;
    let rep = regime(spec)?;
    let hypotheses_met = rep.gradient_weight_nonneg.unwrap_or(true);
    let CauchyParams { q, tau, theta, .. } = mp.params;
    let ko = ko_standard(&mp.g, theta);
    let out = match mp.regime {
        Regime::AboveCritical => {
            let exists = match ko.decision {
                Decision::Diverges => Exists::Yes,
                Decision::Converges => Exists::No,
                Decision::Inconclusive => Exists::Conditional,
            };
            let basis = if exists == Exists::Conditional { Basis::Undetermined } else { Basis::KoEquivalence };
            ExistenceVerdict { exists, basis, ko, kappa_ko: None, hypotheses_met }
        }
        Regime::BelowCritical { .. } => {
            let kv = ko_kappa(&mp.g, theta, tau, q, None)?;
            let (exists, basis) = if kv.decision == Decision::Diverges {
                (Exists::Yes, Basis::KappaSufficient)
            } else if ko.decision == Decision::Converges {
                (Exists::No, Basis::KoNecessary)
            } else {
                (Exists::Conditional, Basis::Undetermined)
            };
            ExistenceVerdict { exists, basis, ko, kappa_ko: Some(kv), hypotheses_met }
        }
    };
    Ok(out)
}

/// Exact counterpart of [`PdeSpec`] for rational parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSpec {
    pub family: Family,
    pub n: u32,
    pub k: u32,
    pub p: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
}

impl RationalSpec {
    pub fn exponents(&self) -> Exponents<BigRational> {
        exponents(self.family, self.n, self.k, &self.p, &self.alpha, &self.beta)
    }

    /// Case from the sign of `α + β + 2 − p`.
    pub fn case_tag(&self) -> CaseTag {
        let d = self.alpha.clone() + self.beta.clone() + BigRational::int(2) - self.p.clone();
        if d.is_zero() {
            CaseTag::II
        } else if d.is_positive() {
            CaseTag::I
        } else {
            CaseTag::III
        }
    }

    /// Case of the reduced problem, computed from `(q, τ, θ)`.
    pub fn reduced_case_tag(&self) -> CaseTag {
        let e = self.exponents();
        case_of_exact(&e.q, &e.tau, &e.theta)
    }

    pub fn above_critical(&self) -> bool {
        let ac = match self.family {
            Family::KHessian => BigRational::new(BigInt::from(1), BigInt::from(self.k)) - BigRational::int(1),
            Family::PiKHessian => {
                BigRational::new(BigInt::from(self.k), BigInt::from(self.n)) - BigRational::int(1)
            }
        };
        self.alpha >= ac
    }

    /// `τ = θ(q + 1/(p−1))` exactly.
    pub fn gradient_gate(&self) -> bool {
        let e = self.exponents();
        let one = BigRational::int(1);
        e.tau == e.theta * (e.q + one.clone() / (self.p.clone() - one))
    }
}

/// One line of the parameter dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub equation: String,
    pub family: Family,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub q: f64,
    pub tau: f64,
    pub theta: f64,
    pub g_exponent: f64,
}

/// The eight specialisations (family × {p = 2, general p} × {plain, weighted RHS}).
pub fn table_rows(n: u32, k: u32, p: f64, alpha: f64, beta: f64) -> Result<Vec<TableRow>> {
    let mut rows = Vec::with_capacity(8);
    for family in [Family::KHessian, Family::PiKHessian] {
        let name = match family {
            Family::KHessian => "k-Hessian",
            Family::PiKHessian => "Pi_k-Hessian",
        };
        let variants = [
            (name.to_string(), 2.0, 0.0, 0.0),
            (format!("{name} with degenerate RHS"), 2.0, alpha, beta),
            (format!("p-{name}"), p, 0.0, 0.0),
            (format!("p-{name} with degenerate RHS"), p, alpha, beta),
        ];
        for (equation, pp, aa, bb) in variants {
            let spec = PdeSpec { family, n, k, p: pp, alpha: aa, beta: bb, f: Nonlinearity::constant(1.0) };
            let mp = map_to_cauchy(&spec)?;
            rows.push(TableRow {
                equation,
                family,
                p: pp,
                alpha: aa,
                beta: bb,
                c: mp.params.c,
                q: mp.params.q,
                tau: mp.params.tau,
                theta: mp.params.theta,
                g_exponent: mp.g_exponent,
            });
        }
    }
    Ok(rows)
}

/// Float case tag of the reduced problem (same rule as the Cauchy classifier).
pub fn reduced_case_tag(mp: &MappedProblem) -> CaseTag {
    case_of(mp.params.q, mp.params.tau, mp.params.theta)
}
