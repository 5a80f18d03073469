//! `S_k` and `Π_k` on eigenvalue vectors and on radial profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapper::binomial_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenVector {
    pub lambdas: Vec<f64>,
}

impl EigenVector {
    pub fn new(lambdas: Vec<f64>) -> Self {
        EigenVector { lambdas }
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    fn check(&self, k: usize) -> Result<()> {
        let n = self.n();
        if n == 0 || k == 0 || k > n {
            return Err(Error::OrderOutOfRange { k, n });
        }
        Ok(())
    }
}

/// Largest number of index subsets `pi_k` will enumerate.
pub const MAX_SUBSETS: f64 = 5e7;

/// Elementary symmetric polynomial of degree `k`, from the coefficients of `∏(x + λᵢ)`.
pub fn sigma_k(ev: &EigenVector, k: usize) -> Result<f64> {
    ev.check(k)?;
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &l) in ev.lambdas.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            e[j] += l * e[j - 1];
        }
    }
    Ok(e[k])
}

/// Visits every `k`-subset sum in lexicographic order of the index sets.
fn for_each_k_sum<F: FnMut(f64)>(lambdas: &[f64], k: usize, mut visit: F) {
    let n = lambdas.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(idx.iter().map(|&i| lambdas[i]).sum());
        // advance to the next combination
        let mut j = k;
        while j > 0 && idx[j - 1] == n - k + j - 1 {
            j -= 1;
        }
        if j == 0 {
            return;
        }
        idx[j - 1] += 1;
        for t in j..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

fn check_subset_count(n: usize, k: usize) -> Result<()> {
    let count = binomial_f64(n as u32, k as u32);
    if count > MAX_SUBSETS {
        return Err(Error::Overflow(format!("C({n},{k}) = {count:e} subsets is too many to enumerate")));
    }
    Ok(())
}

/// Product over all `k`-subsets of the subset sum.
pub fn pi_k(ev: &EigenVector, k: usize) -> Result<f64> {
    ev.check(k)?;
    check_subset_count(ev.n(), k)?;
    let mut prod = 1.0;
    for_each_k_sum(&ev.lambdas, k, |s| prod *= s);
    if prod.is_finite() {
        Ok(prod)
    } else {
        Err(Error::Overflow(format!("Pi_{k} exceeds the f64 range; use ln_pi_k")))
    }
}

/// `ln Π_k` when every `k`-sum is positive.
pub fn ln_pi_k(ev: &EigenVector, k: usize) -> Result<f64> {
    ev.check(k)?;
    if !in_p_k(ev, k) {
        return Err(Error::InvalidParams("ln_pi_k needs every k-sum positive".into()));
    }
    check_subset_count(ev.n(), k)?;
    let mut acc = 0.0;
    for_each_k_sum(&ev.lambdas, k, |s| acc += s.ln());
    Ok(acc)
}

/// Gårding cone: `S_i(λ) > 0` for `i = 1..=k`. False for `k` out of range.
pub fn in_gamma_k(ev: &EigenVector, k: usize) -> bool {
    if ev.check(k).is_err() {
        return false;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &l) in ev.lambdas.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e[1..].iter().all(|&x| x > 0.0)
}

/// Every `k`-sum positive, i.e. the `k` smallest entries have positive sum.
pub fn in_p_k(ev: &EigenVector, k: usize) -> bool {
    if ev.check(k).is_err() {
        return false;
    }
    let mut sorted = ev.lambdas.clone();
    sorted.sort_by(f64::total_cmp);
    sorted[..k].iter().sum::<f64>() > 0.0
}

/// A radial profile sampled at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPoint {
    pub r: f64,
    pub vprime: f64,
    pub vpp: f64,
    /// Matrix exponent; 2 gives the plain Hessian.
    pub p: f64,
}

impl RadialPoint {
    /// `(W', W/r)` with `W = (v')^{p−1}`.
    fn flux(&self) -> Result<(f64, f64)> {
        if !(self.r > 0.0) {
            return Err(Error::InvalidParams(format!("radius r = {} must be positive", self.r)));
        }
        if self.vprime < 0.0 {
            return Err(Error::InvalidParams(format!("v' = {} must be nonnegative", self.vprime)));
        }
        if !(self.p > 1.0) {
            return Err(Error::InvalidParams(format!("p = {} must exceed 1", self.p)));
        }
        let e = self.p - 1.0;
        let w = self.vprime.powf(e);
        let wp = if self.p == 2.0 {
            self.vpp
        } else if self.vprime == 0.0 {
            if self.p < 2.0 {
                return Err(Error::Singular(format!("(v')^(p-2) with v' = 0 and p = {}", self.p)));
            }
            0.0
        } else {
            e * self.vprime.powf(e - 1.0) * self.vpp
        };
        Ok((wp, w / self.r))
    }
}

/// Eigenvalues `(W', W/r, …, W/r)` of `D(|Du|^{p−2}Du)` for `u(x) = v(|x|)`.
pub fn radial_eigs(pt: &RadialPoint, n: usize) -> Result<EigenVector> {
    if n == 0 {
        return Err(Error::OrderOutOfRange { k: 0, n });
    }
    let (wp, wr) = pt.flux()?;
    let mut l = vec![wr; n];
    l[0] = wp;
    Ok(EigenVector::new(l))
}

/// Eigenvalues at the origin, all equal to the supplied `W'(0)` (= `v''(0)` when `p = 2`).
pub fn radial_eigs_at_zero(wprime0: f64, n: usize) -> EigenVector {
    EigenVector::new(vec![wprime0; n])
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::OrderOutOfRange { k, n });
    }
    Ok(())
}

/// `S_k = C(n−1,k−1) (W/r)^{k−1} (W' + (n−k)/k · W/r)`.
pub fn sk_radial(pt: &RadialPoint, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (wp, wr) = pt.flux()?;
    let (nf, kf) = (n as f64, k as f64);
    Ok(binomial_f64(n as u32 - 1, k as u32 - 1) * wr.powi(k as i32 - 1) * (wp + (nf - kf) / kf * wr))
}

/// `Π_k = (k W/r)^{C(n−1,k)} (W' + (k−1) W/r)^{C(n−1,k−1)}`.
pub fn pik_radial(pt: &RadialPoint, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (wp, wr) = pt.flux()?;
    let kf = k as f64;
    let a = binomial_f64(n as u32 - 1, k as u32);
    let b = binomial_f64(n as u32 - 1, k as u32 - 1);
    let v = (kf * wr).powf(a) * (wp + (kf - 1.0) * wr).powf(b);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("Pi_{k} at r = {} exceeds the f64 range", pt.r)))
    }
}

/// `S_k` at the origin: `C(n,k) λ^k`.
pub fn sk_at_zero(wprime0: f64, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    Ok(binomial_f64(n as u32, k as u32) * wprime0.powi(k as i32))
}

/// `Π_k` at the origin: `(k λ)^{C(n,k)}`.
pub fn pik_at_zero(wprime0: f64, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    Ok((k as f64 * wprime0).powf(binomial_f64(n as u32, k as u32)))
}

/// `ln S_k(μ)^{1/k}` for the radial pattern `μ = (μ₁, μ₂, …, μ₂)`.
pub fn ln_sk_normalized_radial(mu1: f64, mu2: f64, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let bracket = mu1 + (nf - kf) / kf * mu2;
    let val = binomial_f64(n as u32 - 1, k as u32 - 1).ln() + (kf - 1.0) * mu2.ln() + bracket.ln();
    Ok(val / kf)
}

/// `ln Π_k(μ)^{1/C(n,k)}` for the radial pattern `μ = (μ₁, μ₂, …, μ₂)`.
pub fn ln_pik_normalized_radial(mu1: f64, mu2: f64, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok((nf - kf) / nf * (kf * mu2).ln() + kf / nf * (mu1 + (kf - 1.0) * mu2).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ev(v: &[f64]) -> EigenVector {
        EigenVector::new(v.to_vec())
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_k(&ev(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(sigma_k(&ev(&[1.0; 5]), 5).unwrap(), 1.0);
        assert_eq!(sigma_k(&ev(&[2.0; 4]), 2).unwrap(), 6.0 * 4.0);
        assert!(sigma_k(&ev(&[1.0, 2.0]), 3).is_err());
        assert!(sigma_k(&ev(&[1.0, 2.0]), 0).is_err());
    }

    #[test]
    fn pi_examples() {
        assert_eq!(pi_k(&ev(&[1.0, 2.0, 3.0]), 2).unwrap(), 60.0);
        assert_eq!(pi_k(&ev(&[1.5; 4]), 2).unwrap(), 3f64.powi(6));
        assert_eq!(pi_k(&ev(&[1.0, -2.0, 5.0]), 3).unwrap(), 4.0);
        assert_eq!(pi_k(&ev(&[1.0, -2.0, 5.0]), 1).unwrap(), -10.0);
        assert_relative_eq!(ln_pi_k(&ev(&[1.0, 2.0, 3.0]), 2).unwrap(), 60f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn pi_overflow_is_reported() {
        let big = ev(&[1e10; 20]);
        assert!(matches!(pi_k(&big, 10), Err(Error::Overflow(_))));
        assert!(ln_pi_k(&big, 10).unwrap().is_finite());
    }

    #[test]
    fn cones() {
        assert!(in_gamma_k(&ev(&[1.0, 1.0, 1.0]), 3));
        assert!(!in_gamma_k(&ev(&[-1.0, -1.0, -1.0]), 1));
        assert!(in_gamma_k(&ev(&[3.0, 3.0, -1.0]), 2));
        assert!(in_p_k(&ev(&[1.0, 1.0, 1.0]), 2));
        assert!(in_p_k(&ev(&[-1.0, 3.0, 3.0]), 2));
        assert!(!in_p_k(&ev(&[-2.0, 1.0, 1.0]), 2));
    }

    #[test]
    fn radial_parabola() {
        let r = 0.7;
        let pt = RadialPoint { r, vprime: r, vpp: 1.0, p: 2.0 };
        assert_eq!(radial_eigs(&pt, 4).unwrap().lambdas, vec![1.0; 4]);
        for k in 1..=4 {
            assert_relative_eq!(sk_radial(&pt, 4, k).unwrap(), binomial_f64(4, k as u32), max_relative = 1e-14);
        }
        let a = 2.5;
        let pt = RadialPoint { r, vprime: a * r, vpp: a, p: 2.0 };
        let c = binomial_f64(5, 2);
        assert_relative_eq!(pik_radial(&pt, 5, 2).unwrap().powf(1.0 / c), 2.0 * a, max_relative = 1e-13);
    }

    #[test]
    fn radial_p_matrix() {
        // v' = a r³, p = 3/2
        let (a, r) = (0.3f64, 1.7f64);
        let pt = RadialPoint { r, vprime: a * r.powi(3), vpp: 3.0 * a * r * r, p: 1.5 };
        let l = radial_eigs(&pt, 3).unwrap().lambdas;
        assert_relative_eq!(l[0], 1.5 * a.sqrt() * r.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(l[1], a.sqrt() * r.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn singular_factor() {
        let pt = RadialPoint { r: 1.0, vprime: 0.0, vpp: 1.0, p: 1.5 };
        assert!(matches!(radial_eigs(&pt, 3), Err(Error::Singular(_))));
    }

    #[test]
    fn origin_values() {
        assert_eq!(radial_eigs_at_zero(2.0, 3).lambdas, vec![2.0; 3]);
        assert_eq!(sk_at_zero(2.0, 3, 2).unwrap(), 12.0);
        assert_eq!(pik_at_zero(2.0, 3, 2).unwrap(), 64.0);
    }

    #[test]
    fn normalized_radial_logs() {
        let (mu1, mu2) = (1.3, 0.4);
        let v = ev(&[mu1, mu2, mu2, mu2]);
        let c = binomial_f64(4, 2);
        assert_relative_eq!(
            ln_pik_normalized_radial(mu1, mu2, 4, 2).unwrap(),
            pi_k(&v, 2).unwrap().ln() / c,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            ln_sk_normalized_radial(mu1, mu2, 4, 3).unwrap(),
            sigma_k(&v, 3).unwrap().ln() / 3.0,
            max_relative = 1e-13
        );
    }
}
