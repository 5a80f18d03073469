//! The right-hand side `g` and its antiderivative `G(t) = ∫₀ᵗ g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-negative, non-decreasing function of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `g ≡ g0`.
    Constant { g0: f64 },
    /// `g(t) = t^d` for `t > 0`, zero otherwise.
    Power { d: f64 },
    /// `g(t) = e^{ct}`.
    Exponential { c: f64 },
    /// Piecewise-linear through `(t, g(t))` knots, constant outside the table.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl Nonlinearity {
    pub fn constant(g0: f64) -> Self {
        Nonlinearity::Constant { g0 }
    }

    pub fn power(d: f64) -> Self {
        Nonlinearity::Power { d }
    }

    pub fn exponential(c: f64) -> Self {
        Nonlinearity::Exponential { c }
    }

    /// Builds a table, validating it.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let g = Nonlinearity::Tabulated { knots };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Nonlinearity::Constant { g0 } => {
                if !(g0.is_finite() && *g0 > 0.0) {
                    return Err(Error::InvalidParams(format!("constant g0 = {g0} must be positive")));
                }
            }
            Nonlinearity::Power { d } => {
                if !(d.is_finite() && *d >= 0.0) {
                    return Err(Error::InvalidParams(format!("power d = {d} must be nonnegative")));
                }
            }
            Nonlinearity::Exponential { c } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidParams(format!("exponential c = {c} must be nonnegative")));
                }
            }
            Nonlinearity::Tabulated { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidParams("table has no knots".into()));
                }
                for &(t, y) in knots {
                    if !t.is_finite() || !y.is_finite() || y < 0.0 {
                        return Err(Error::InvalidParams(format!("bad knot ({t}, {y})")));
                    }
                }
                for w in knots.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidParams("knot abscissae must be strictly increasing".into()));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::InvalidParams("knot values must be non-decreasing".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Short family tag used in verdict evidence.
    pub fn family(&self) -> &'static str {
        match self {
            Nonlinearity::Constant { .. } => "constant",
            Nonlinearity::Power { .. } => "power",
            Nonlinearity::Exponential { .. } => "exponential",
            Nonlinearity::Tabulated { .. } => "tabulated",
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Nonlinearity::Tabulated { .. })
    }

    /// Whether `g` vanishes somewhere, so that only `a ≥ 0` is admissible.
    pub fn vanishes_at_zero(&self) -> bool {
        match self {
            Nonlinearity::Power { .. } => true,
            Nonlinearity::Tabulated { .. } => self.eval(0.0) == 0.0,
            _ => false,
        }
    }

    /// `g(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Constant { g0 } => *g0,
            Nonlinearity::Power { d } => {
                if t > 0.0 {
                    t.powf(*d)
                } else {
                    0.0
                }
            }
            Nonlinearity::Exponential { c } => {
                if *c == 0.0 {
                    1.0
                } else {
                    (c * t).exp()
                }
            }
            Nonlinearity::Tabulated { knots } => table_eval(knots, t),
        }
    }

    /// `ln g(t)`, `-inf` where `g` vanishes.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Constant { g0 } => g0.ln(),
            Nonlinearity::Power { d } => {
                if t > 0.0 {
                    d * t.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Nonlinearity::Exponential { c } => {
                if *c == 0.0 {
                    0.0
                } else {
                    c * t
                }
            }
            Nonlinearity::Tabulated { knots } => table_eval(knots, t).ln(),
        }
    }

    /// `ln g(base + e^u)`, accurate when `e^u` overflows or dominates `base`.
    pub fn ln_eval_shifted(&self, base: f64, u: f64) -> f64 {
        match self {
            Nonlinearity::Power { d } => {
                // base + e^u = e^u (1 + base e^{-u})
                let x = base * (-u).exp();
                if x <= -1.0 {
                    f64::NEG_INFINITY
                } else if *d == 0.0 {
                    0.0
                } else {
                    d * (u + x.ln_1p())
                }
            }
            _ => self.ln_eval(base + u.exp()),
        }
    }

    /// `G(t) = ∫₀ᵗ g(s) ds` (negative for `t < 0` when `g` is positive there).
    pub fn antideriv(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Constant { g0 } => g0 * t,
            Nonlinearity::Power { d } => {
                if t > 0.0 {
                    t.powf(d + 1.0) / (d + 1.0)
                } else {
                    0.0
                }
            }
            Nonlinearity::Exponential { c } => {
                if *c == 0.0 {
                    t
                } else {
                    (c * t).exp_m1() / c
                }
            }
            Nonlinearity::Tabulated { knots } => table_integral(knots, 0.0, t),
        }
    }

    /// `ln G(t)` for `t > 0`, stable for large arguments.
    pub fn ln_antideriv(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Constant { g0 } => g0.ln() + t.ln(),
            Nonlinearity::Power { d } => {
                if t > 0.0 {
                    (d + 1.0) * t.ln() - (d + 1.0).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Nonlinearity::Exponential { c } => {
                if *c == 0.0 {
                    t.ln()
                } else {
                    // (e^{ct} - 1)/c = e^{ct}(1 - e^{-ct})/c
                    let ct = c * t;
                    ct + (-(-ct).exp_m1()).ln() - c.ln()
                }
            }
            Nonlinearity::Tabulated { .. } => self.antideriv(t).ln(),
        }
    }

    /// `∫ₐᵇ g(s) ds` without the cancellation of `G(b) - G(a)`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Nonlinearity::Constant { g0 } => g0 * (b - a),
            Nonlinearity::Power { d } => {
                let lo = a.max(0.0);
                let hi = b.max(0.0);
                if hi <= lo {
                    return if b >= a { 0.0 } else { -self.integral(b, a) };
                }
                if lo == 0.0 {
                    return hi.powf(d + 1.0) / (d + 1.0);
                }
                // lo^{d+1}/(d+1) · ((hi/lo)^{d+1} - 1)
                let e = (d + 1.0) * ((hi - lo) / lo).ln_1p();
                lo.powf(d + 1.0) * e.exp_m1() / (d + 1.0)
            }
            Nonlinearity::Exponential { c } => {
                if *c == 0.0 {
                    b - a
                } else {
                    (c * a).exp() * (c * (b - a)).exp_m1() / c
                }
            }
            Nonlinearity::Tabulated { knots } => table_integral(knots, a, b),
        }
    }

    /// `g^m` as another member of the same family.
    pub fn powf(&self, m: f64) -> Nonlinearity {
        match self {
            Nonlinearity::Constant { g0 } => Nonlinearity::Constant { g0: g0.powf(m) },
            Nonlinearity::Power { d } => Nonlinearity::Power { d: d * m },
            Nonlinearity::Exponential { c } => Nonlinearity::Exponential { c: c * m },
            Nonlinearity::Tabulated { knots } => Nonlinearity::Tabulated {
                knots: knots.iter().map(|&(t, y)| (t, y.powf(m))).collect(),
            },
        }
    }

    /// `λ g` for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Option<Nonlinearity> {
        match self {
            Nonlinearity::Constant { g0 } => Some(Nonlinearity::Constant { g0: lambda * g0 }),
            Nonlinearity::Tabulated { knots } => Some(Nonlinearity::Tabulated {
                knots: knots.iter().map(|&(t, y)| (t, lambda * y)).collect(),
            }),
            _ => None,
        }
    }
}

fn table_eval(knots: &[(f64, f64)], t: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    // first index with knot abscissa > t
    let j = knots.partition_point(|&(x, _)| x <= t);
    let (x0, y0) = knots[j - 1];
    let (x1, y1) = knots[j];
    let w = (t - x0) / (x1 - x0);
    // convex combination keeps the value inside [y0, y1]
    (y0 + w * (y1 - y0)).clamp(y0, y1)
}

/// Exact integral of the piecewise-linear interpolant (with constant tails).
fn table_integral(knots: &[(f64, f64)], a: f64, b: f64) -> f64 {
    if b < a {
        return -table_integral(knots, b, a);
    }
    if a == b {
        return 0.0;
    }
    let first = knots[0];
    let last = knots[knots.len() - 1];
    let mut total = 0.0;
    // left constant tail
    if a < first.0 {
        total += first.1 * (b.min(first.0) - a);
    }
    // interior segments
    for w in knots.windows(2) {
        let lo = a.max(w[0].0);
        let hi = b.min(w[1].0);
        if hi > lo {
            total += 0.5 * (table_eval(knots, lo) + table_eval(knots, hi)) * (hi - lo);
        }
    }
    // right constant tail
    if b > last.0 {
        total += last.1 * (b - a.max(last.0));
    }
    total
}
