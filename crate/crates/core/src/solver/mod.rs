//! Integration of the singular Cauchy problem from the origin.
//!
//! Near `r = 0` the unknowns `w = v − a` and `I = ∫₀ʳ s^{τ−1} g(v) ds` behave
//! like powers of `r`, so the first phase integrates `(ln w, ln I)` against
//! `ln r`. Once `v` grows faster than any moderate power, the second phase
//! switches the independent variable to `u = ln(1 + w)` and integrates
//! `(ln r, ln I)`; a finite-time blow-up then shows up as `r(u)` converging.

mod diagnostics;
mod euler;
pub(crate) mod rk;

use std::collections::VecDeque;

use log::debug;
use serde::{Deserialize, Serialize};

pub use diagnostics::{
    energy_oracle_radius, euler_step_bounds, limit_checks, residual_identity, residual_identity_on, LimitCheck,
    LimitReport, OracleRadius, StepBounds,
};
pub use euler::euler_construct;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::params::CauchyParams;
use crate::profile::{SolutionProfile, Status};
use rk::{drive, DenseStep, Flow, Outcome, Tolerance};

/// Knobs of a single solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveControl {
    pub r_horizon: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub v_blowup_threshold: f64,
    pub max_steps: usize,
    pub r0_seed: f64,
}

impl SolveControl {
    /// Defaults for a given horizon; the seed radius is `1e-6` of it.
    pub fn with_horizon(r_horizon: f64) -> Self {
        SolveControl {
            r_horizon,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            v_blowup_threshold: 1e12,
            max_steps: 1_000_000,
            r0_seed: 1e-6 * r_horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.r_horizon.is_finite()
            && self.r_horizon > 0.0
            && self.r0_seed > 0.0
            && self.r0_seed < self.r_horizon
            && self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.v_blowup_threshold > 0.0
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "solve control needs 0 < r0_seed < r_horizon, positive tolerances and steps: {self:?}"
            )))
        }
    }
}

/// Leading-order state `(v, v', I)` at a small radius `r0`.
pub fn asymptotic_seed(params: &CauchyParams, g: &Nonlinearity, a: f64, r0: f64) -> (f64, f64, f64) {
    let (v0, vp0, i0) = seed_parts(params, g.eval(a), r0);
    (a + v0, vp0, i0)
}

/// `(w, v', I)` with `w = v − a`.
fn seed_parts(params: &CauchyParams, g_a: f64, r0: f64) -> (f64, f64, f64) {
    let CauchyParams { tau, theta, .. } = *params;
    let k = params.leading_coeff(g_a);
    let s = params.vprime_exponent();
    let vp0 = k * r0.powf(s);
    let w0 = k * theta / (params.gap() + theta) * r0.powf(s + 1.0);
    let i0 = g_a * r0.powf(tau) / tau;
    (w0, vp0, i0)
}

const PHASE1_SAMPLES: usize = 8;
const PHASE1_H_MAX: f64 = 0.05;
const PHASE2_SAMPLES: usize = 16;
const PHASE2_H_MAX: f64 = 0.1;
/// `r v' / (1 + w)` beyond which the second phase takes over.
const SWITCH_GROWTH: f64 = 10.0;

/// Integrates the problem with initial value `a` up to `ctrl.r_horizon` or blow-up.
pub fn solve(params: &CauchyParams, g: &Nonlinearity, a: f64, ctrl: &SolveControl) -> Result<SolutionProfile> {
    params.validate()?;
    g.validate()?;
    ctrl.validate()?;
    if !a.is_finite() {
        return Err(Error::InvalidParams(format!("initial value a = {a} must be finite")));
    }
    if g.vanishes_at_zero() && a < 0.0 {
        return Err(Error::InvalidParams(format!("initial value a = {a} must be nonnegative for this g")));
    }

    let mut prof = SolutionProfile::empty(a);
    let g_a = g.eval(a);
    if g_a <= 0.0 {
        // v ≡ a solves the problem
        for i in 0..=16 {
            let r = ctrl.r0_seed * (ctrl.r_horizon / ctrl.r0_seed).powf(i as f64 / 16.0);
            prof.push(r, a, 0.0, 0.0);
        }
        prof.status = Status::Global { r_horizon: ctrl.r_horizon };
        return Ok(prof);
    }

    let mut steps_left = ctrl.max_steps;
    let tol = Tolerance { rel: ctrl.rel_tol, abs: ctrl.abs_tol };
    let CauchyParams { c, q, tau, theta } = *params;
    let ln_c = c.ln();

    // phase 1: x = ln r, y = (ln w, ln I)
    let (w0, vp0, i0) = seed_parts(params, g_a, ctrl.r0_seed);
    prof.push(ctrl.r0_seed, a + w0, vp0, i0);
    let f1 = |x: f64, y: &[f64; 2]| {
        let (lw, li) = (y[0], y[1]);
        let dw = (x + ln_c - q * x + li / theta - lw).exp();
        let di = (tau * x + g.ln_eval(a + lw.exp()) - li).exp();
        (dw.is_finite() && di.is_finite()).then_some([dw, di])
    };
    let x_end = ctrl.r_horizon.ln();
    let sample1 = |x: f64, y: [f64; 2]| {
        let r = x.exp();
        let vp = (ln_c - q * x + y[1] / theta).exp();
        (r, a + y[0].exp(), vp, y[1].exp())
    };
    let mut switch = false;
    let (outcome, x, y) = drive(
        f1,
        ctrl.r0_seed.ln(),
        [w0.ln(), i0.ln()],
        x_end,
        1e-3,
        PHASE1_H_MAX,
        &tol,
        &mut steps_left,
        |st: &DenseStep| {
            for j in 1..=PHASE1_SAMPLES {
                let xx = st.t0 + st.h * j as f64 / PHASE1_SAMPLES as f64;
                let (r, v, vp, acc) = sample1(xx, st.eval(xx));
                prof.push(r, v, vp, acc);
            }
            let (r, _, vp, _) = sample1(st.t1(), st.y1);
            let w = st.y1[0].exp();
            if r * vp >= SWITCH_GROWTH * (1.0 + w) {
                switch = true;
                return Flow::Stop;
            }
            Flow::Continue
        },
    );
    match outcome {
        Outcome::Reached => {
            prof.status = Status::Global { r_horizon: ctrl.r_horizon };
            return Ok(prof);
        }
        Outcome::MaxSteps => {
            prof.status = Status::Aborted { reason: format!("step budget exhausted at r = {:e}", x.exp()) };
            return Ok(prof);
        }
        Outcome::Stopped | Outcome::StepCollapse => {
            if !switch {
                debug!("step collapse at r = {:e}, switching to growth variable", x.exp());
            }
        }
    }

    // phase 2: u = ln(1 + w), y = (ln r, ln I)
    let w_sw = y[0].exp();
    let u0 = w_sw.ln_1p();
    let base = a - 1.0;
    let ln_vprime = |lr: f64, li: f64| ln_c - q * lr + li / theta;
    let f2 = |u: f64, y: &[f64; 2]| {
        let (lr, li) = (y[0], y[1]);
        let lvp = ln_vprime(lr, li);
        let dr = (u - lvp - lr).exp();
        let di = ((tau - 1.0) * lr + g.ln_eval_shifted(base, u) + u - lvp - li).exp();
        (dr.is_finite() && di.is_finite()).then_some([dr, di])
    };
    let ln_h = ctrl.r_horizon.ln();
    let u_thr = (ctrl.v_blowup_threshold - a).max(0.0).ln_1p();
    let mut history: VecDeque<(f64, f64)> = VecDeque::new();
    let mut verdict: Option<Status> = None;
    let (outcome, u, y2) = drive(
        f2,
        u0,
        [x, y[1]],
        f64::INFINITY,
        1e-2,
        PHASE2_H_MAX,
        &tol,
        &mut steps_left,
        |st: &DenseStep| {
            let crosses = st.y1[0] >= ln_h;
            let u_stop = if crosses { bisect_horizon(st, ln_h) } else { st.t1() };
            for j in 1..=PHASE2_SAMPLES {
                let uu = st.t0 + (u_stop - st.t0) * j as f64 / PHASE2_SAMPLES as f64;
                let yy = st.eval(uu);
                let r = if crosses && j == PHASE2_SAMPLES { ctrl.r_horizon } else { yy[0].exp() };
                prof.push(r, a + uu.exp_m1(), ln_vprime(yy[0], yy[1]).exp(), yy[1].exp());
            }
            if crosses {
                verdict = Some(Status::Global { r_horizon: ctrl.r_horizon });
                return Flow::Stop;
            }
            let u1 = st.t1();
            let ln_rho = u1 - ln_vprime(st.y1[0], st.y1[1]);
            history.push_back((u1, ln_rho));
            while history.front().is_some_and(|&(uf, _)| uf < u1 - std::f64::consts::LN_10) {
                history.pop_front();
            }
            let r = st.y1[0].exp();
            if let Some(kappa) = decay_rate(&history) {
                let gap = (ln_rho - kappa.ln()).exp();
                let past_threshold = u1 >= u_thr && gap <= 1e-6 * r;
                let saturated = gap <= 4.0 * f64::EPSILON * r;
                if past_threshold || saturated {
                    let r_est = r + gap;
                    verdict = Some(Status::BlowUp { r_estimate: r_est, r_bracket: (r, r_est) });
                    return Flow::Stop;
                }
            }
            Flow::Continue
        },
    );
    prof.status = match verdict {
        Some(s) => s,
        None => {
            let r = y2[0].exp();
            let reason = match outcome {
                Outcome::MaxSteps => format!("step budget exhausted at r = {r:e}, v = {:e}", a + u.exp_m1()),
                _ => format!("step size collapsed at r = {r:e}, v = {:e}", a + u.exp_m1()),
            };
            Status::Aborted { reason }
        }
    };
    Ok(prof)
}

/// `u` at which `ln r(u)` reaches `ln_h` inside the step.
fn bisect_horizon(st: &DenseStep, ln_h: f64) -> f64 {
    let (mut lo, mut hi) = (st.t0, st.t1());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if st.eval(mid)[0] >= ln_h {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `κ` in `ρ ∝ e^{−κu}` from a least-squares fit of `ln ρ` on the window.
fn decay_rate(history: &VecDeque<(f64, f64)>) -> Option<f64> {
    if history.len() < 5 {
        return None;
    }
    let span = history.back()?.0 - history.front()?.0;
    if span < 0.9 * std::f64::consts::LN_10 {
        return None;
    }
    let n = history.len() as f64;
    let mx = history.iter().map(|p| p.0).sum::<f64>() / n;
    let my = history.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in history {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let kappa = -sxy / sxx;
    (kappa.is_finite() && kappa > 0.0).then_some(kappa)
}
