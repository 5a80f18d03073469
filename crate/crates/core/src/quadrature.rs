//! Adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Seg {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// `∫ₐᵇ f` to `max(abs_tol, rel_tol·|value|)`, bisecting the worst segment.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad> {
    const MAX_SEGMENTS: usize = 2000;
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Seg { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    while !(err <= abs_tol.max(rel_tol * total.abs())) {
        if !(total.is_finite() && err.is_finite()) {
            return Err(Error::Quadrature { achieved: f64::INFINITY, requested: abs_tol });
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature { achieved: err, requested: abs_tol.max(rel_tol * total.abs()) });
        }
        let s = heap.pop().expect("heap is never empty");
        let m = 0.5 * (s.a + s.b);
        if m <= s.a.min(s.b) || m >= s.a.max(s.b) {
            // segment cannot be split further in floating point
            return Err(Error::Quadrature { achieved: err, requested: abs_tol.max(rel_tol * total.abs()) });
        }
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.error;
        heap.push(Seg { a: s.a, b: m, value: v1, error: e1 });
        heap.push(Seg { a: m, b: s.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated rounding in the running totals
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if !(value.is_finite() && error.is_finite()) {
        return Err(Error::Quadrature { achieved: error, requested: abs_tol.max(rel_tol * total.abs()) });
    }
    Ok(Quad { value, error })
}

/// `∫ₐ^∞ f` through `x = a + t/(1-t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let y = f(a + t / u) / (u * u);
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, abs_tol, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x * x, 0.0, 3.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(q.value, 9.0, max_relative = 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn semi_infinite() {
        let q = integrate_to_inf(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(q.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-11);
        let q = integrate_to_inf(|x: f64| (-x).exp(), 1.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(q.value, (-1f64).exp(), max_relative = 1e-11);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })), "{r:?}");
    }
}
