//! Dormand–Prince 5(4) with continuous output.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub(crate) type State = [f64; 2];

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for i in 0..2 {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// One accepted step with its interpolant.
pub(crate) struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub y1: State,
    rcont: [State; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// State at `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> State {
        let s = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        out
    }
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Reached,
    Stopped,
    StepCollapse,
    MaxSteps,
}

pub(crate) struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

/// Integrates `y' = f(t, y)` from `t0` towards `t_end`.
///
/// `f` returns `None` for a non-finite evaluation, which rejects the step.
/// `on_step` sees every accepted step and may stop the run.
#[allow(clippy::too_many_arguments)]
pub(crate) fn drive<F, S>(
    f: F,
    t0: f64,
    y0: State,
    t_end: f64,
    h0: f64,
    h_max: f64,
    tol: &Tolerance,
    steps_left: &mut usize,
    mut on_step: S,
) -> (Outcome, f64, State)
where
    F: Fn(f64, &State) -> Option<State>,
    S: FnMut(&DenseStep) -> Flow,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = h0.min(h_max).min(t_end - t0);
    let Some(mut k1) = f(t, &y) else {
        return (Outcome::StepCollapse, t, y);
    };
    loop {
        if t >= t_end {
            return (Outcome::Reached, t, y);
        }
        if *steps_left == 0 {
            return (Outcome::MaxSteps, t, y);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1e-300) {
            return (Outcome::StepCollapse, t, y);
        }
        *steps_left -= 1;

        match attempt(&f, t, &y, &k1, h, tol) {
            Some((y1, k7, err, ks)) if err <= 1.0 => {
                let ydiff = [y1[0] - y[0], y1[1] - y[1]];
                let bspl = [h * k1[0] - ydiff[0], h * k1[1] - ydiff[1]];
                let mut r4 = [0.0; 2];
                for i in 0..2 {
                    r4[i] = h
                        * (D1 * k1[i] + D3 * ks[0][i] + D4 * ks[1][i] + D5 * ks[2][i] + D6 * ks[3][i] + D7 * k7[i]);
                }
                let step = DenseStep {
                    t0: t,
                    h,
                    y1,
                    rcont: [
                        y,
                        ydiff,
                        bspl,
                        [ydiff[0] - h * k7[0] - bspl[0], ydiff[1] - h * k7[1] - bspl[1]],
                        r4,
                    ],
                };
                t = if last { t_end } else { t + h };
                y = y1;
                k1 = k7;
                if let Flow::Stop = on_step(&step) {
                    return (Outcome::Stopped, t, y);
                }
                let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
                h = (h * fac).min(h_max);
            }
            Some((_, _, err, _)) => {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h *= fac;
            }
            None => h *= 0.2,
        }
    }
}

type Stages = [State; 4];

#[allow(clippy::type_complexity)]
fn stages<F>(f: &F, t: f64, y: &State, k1: &State, h: f64) -> Option<(State, State, State, State, State)>
where
    F: Fn(f64, &State) -> Option<State>,
{
    let k2 = f(t + C2 * h, &axpy(y, &[(A21, k1)], h))?;
    let k3 = f(t + C3 * h, &axpy(y, &[(A31, k1), (A32, &k2)], h))?;
    let k4 = f(t + C4 * h, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h))?;
    let k5 = f(t + C5 * h, &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h))?;
    let k6 = f(t + h, &axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h))?;
    Some((k2, k3, k4, k5, k6))
}

fn attempt<F>(f: &F, t: f64, y: &State, k1: &State, h: f64, tol: &Tolerance) -> Option<(State, State, f64, Stages)>
where
    F: Fn(f64, &State) -> Option<State>,
{
    let (_k2, k3, k4, k5, k6) = stages(f, t, y, k1, h)?;
    let y1 = axpy(y, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
    let k7 = f(t + h, &y1)?;
    let mut sq = 0.0;
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.abs + tol.rel * y[i].abs().max(y1[i].abs());
        sq += (e / sc).powi(2);
    }
    let err = (sq / 2.0).sqrt();
    if !err.is_finite() || !y1.iter().all(|x| x.is_finite()) {
        return None;
    }
    Some((y1, k7, err, [k3, k4, k5, k6]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &State| Some([y[1], -y[0]]);
        let tol = Tolerance { rel: 1e-10, abs: 1e-12 };
        let mut left = 100_000;
        let mut max_dense_err: f64 = 0.0;
        let (out, t, y) = drive(f, 0.0, [0.0, 1.0], 10.0, 1e-3, 1.0, &tol, &mut left, |st| {
            for j in 0..=8 {
                let tt = st.t0 + st.h * j as f64 / 8.0;
                max_dense_err = max_dense_err.max((st.eval(tt)[0] - tt.sin()).abs());
            }
            Flow::Continue
        });
        assert_eq!(out, Outcome::Reached);
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        assert!(max_dense_err < 1e-8, "{max_dense_err}");
    }

    #[test]
    fn rejects_nonfinite_and_collapses() {
        // y' = y² from y=1 blows up at t=1
        let f = |_t: f64, y: &State| {
            let d = y[0] * y[0];
            d.is_finite().then_some([d, 0.0])
        };
        let tol = Tolerance { rel: 1e-10, abs: 1e-12 };
        let mut left = 100_000;
        let (out, t, _) = drive(f, 0.0, [1.0, 0.0], 2.0, 1e-3, 1.0, &tol, &mut left, |_| Flow::Continue);
        assert!(matches!(out, Outcome::StepCollapse | Outcome::MaxSteps));
        assert!((t - 1.0).abs() < 1e-3);
    }
}
