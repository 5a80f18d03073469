//! Discretised trajectories `(r, v, v', I)` and their termination status.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// How an integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Status {
    Global {
        r_horizon: f64,
    },
    BlowUp {
        #[serde(rename = "R_estimate")]
        r_estimate: f64,
        #[serde(rename = "R_bracket")]
        r_bracket: (f64, f64),
    },
    Aborted {
        reason: String,
    },
}

impl Status {
    pub fn is_global(&self) -> bool {
        matches!(self, Status::Global { .. })
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, Status::BlowUp { .. })
    }

    /// `R` for a blow-up, the horizon for a global run.
    pub fn radius(&self) -> Option<f64> {
        match self {
            Status::Global { r_horizon } => Some(*r_horizon),
            Status::BlowUp { r_estimate, .. } => Some(*r_estimate),
            Status::Aborted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    /// Initial value `v(0)`.
    pub a: f64,
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub vprime: Vec<f64>,
    pub accum: Vec<f64>,
    pub status: Status,
}

impl SolutionProfile {
    pub(crate) fn empty(a: f64) -> Self {
        SolutionProfile {
            a,
            grid: Vec::new(),
            v: Vec::new(),
            vprime: Vec::new(),
            accum: Vec::new(),
            status: Status::Aborted { reason: "not started".into() },
        }
    }

    /// Appends a sample if it is finite and strictly to the right of the last one.
    pub(crate) fn push(&mut self, r: f64, v: f64, vp: f64, acc: f64) -> bool {
        if !(r.is_finite() && v.is_finite() && vp.is_finite() && acc.is_finite()) {
            return false;
        }
        if let Some(&last) = self.grid.last() {
            if r <= last {
                return false;
            }
        }
        self.grid.push(r);
        self.v.push(v);
        self.vprime.push(vp);
        self.accum.push(acc);
        true
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Last recorded radius.
    pub fn r_last(&self) -> Option<f64> {
        self.grid.last().copied()
    }

    /// `v(r)` by cubic Hermite interpolation on `(v, v')`; `a` left of the grid.
    pub fn v_at(&self, r: f64) -> Option<f64> {
        let n = self.grid.len();
        if n == 0 || r > self.grid[n - 1] {
            return None;
        }
        if r <= self.grid[0] {
            // linear blend from the initial value
            let w = if self.grid[0] > 0.0 { (r / self.grid[0]).max(0.0) } else { 1.0 };
            return Some(self.a + w * (self.v[0] - self.a));
        }
        let j = self.grid.partition_point(|&x| x < r);
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(h00 * self.v[j - 1] + h10 * h * self.vprime[j - 1] + h01 * self.v[j] + h11 * h * self.vprime[j])
    }

    /// CSV with header `r,v,vprime,accum`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,v,vprime,accum")?;
        for i in 0..self.grid.len() {
            writeln!(out, "{:e},{:e},{:e},{:e}", self.grid[i], self.v[i], self.vprime[i], self.accum[i])?;
        }
        Ok(())
    }

    /// Parses the output of [`SolutionProfile::write_csv`] back into columns.
    pub fn read_csv_columns(text: &str) -> Option<[Vec<f64>; 4]> {
        let mut lines = text.lines();
        if lines.next()?.trim() != "r,v,vprime,accum" {
            return None;
        }
        let mut cols: [Vec<f64>; 4] = Default::default();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split(',');
            for col in cols.iter_mut() {
                col.push(it.next()?.trim().parse().ok()?);
            }
        }
        Some(cols)
    }
}
