//! The piecewise-linear ε-approximation used in the existence proof, kept as an oracle.

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::params::CauchyParams;
use crate::profile::{SolutionProfile, Status};

/// Euler polygon on the uniform partition of `[0, l]` into `m` cells.
///
/// `ψ = a` on the first cell; afterwards `ψ(r_i) = ψ(r_{i−1}) + G(r_{i−1}, ψ)·h`
/// where the inner integral is exact on `[0, r₁]` and trapezoidal beyond.
pub fn euler_construct(
    params: &CauchyParams,
    g: &Nonlinearity,
    a: f64,
    l: f64,
    m: usize,
) -> Result<SolutionProfile> {
    params.validate()?;
    g.validate()?;
    if !(l.is_finite() && l > 0.0) || m < 2 {
        return Err(Error::InvalidParams(format!("need l > 0 and m >= 2, got l = {l}, m = {m}")));
    }
    let CauchyParams { c, q, tau, theta } = *params;
    let h = l / m as f64;
    let kernel = |r: f64, psi: f64| r.powf(tau - 1.0) * g.eval(psi);
    let slope = |r: f64, acc: f64| c * r.powf(-q) * acc.powf(1.0 / theta);

    let mut prof = SolutionProfile::empty(a);
    let r1 = h;
    let mut acc = g.eval(a) * r1.powf(tau) / tau;
    let mut psi = a;
    prof.push(r1, psi, slope(r1, acc), acc);
    let mut prev_kernel = kernel(r1, psi);
    for i in 2..=m {
        let r_prev = (i - 1) as f64 * h;
        let r = i as f64 * h;
        psi += slope(r_prev, acc) * h;
        let k = kernel(r, psi);
        acc += 0.5 * (prev_kernel + k) * h;
        prev_kernel = k;
        if !(psi.is_finite() && acc.is_finite()) {
            prof.status = Status::Aborted { reason: format!("overflow at r = {r:e}") };
            return Ok(prof);
        }
        prof.push(r, psi, slope(r, acc), acc);
    }
    prof.status = Status::Global { r_horizon: l };
    Ok(prof)
}
