// SPDX-License-Identifier: MIT OR Apache-2.0

use super::{check_u, CgfEvaluation, ConditionalCgf, TDomain};
use crate::ar1::{check_length, check_rho, OddConditioning};
use crate::error::Result;
use crate::numerics::{cholesky_upper, symmetric_eigenvalues, Matrix};

/// Total-scale CGF of S for a stationary Gaussian AR(1) path,
/// κ(t) = −½ Σ log(1 − 2tλᵢ) with λ the eigenvalues of U(A − uB)Uᵀ, Σ = UᵀU.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianUnconditionalCgf {
    pub n: usize,
    pub rho: f64,
    pub u: f64,
    /// Ascending.
    pub lambdas: Vec<f64>,
}

/// A with ½ on the first off-diagonals, minus u times diag(½, 1, …, 1, ½).
pub(crate) fn quadratic_form(n: usize, u: f64) -> Matrix {
    Matrix::from_fn(n, |i, j| {
        if i.abs_diff(j) == 1 {
            0.5
        } else if i == j {
            if i == 0 || i == n - 1 {
                -0.5 * u
            } else {
                -u
            }
        } else {
            0.0
        }
    })
}

pub(crate) fn ar1_covariance(n: usize, rho: f64) -> Matrix {
    let scale = 1.0 / (1.0 - rho * rho);
    Matrix::from_fn(n, |i, j| rho.powi(i.abs_diff(j) as i32) * scale)
}

impl GaussianUnconditionalCgf {
    pub fn new(n: usize, rho: f64, u: f64) -> Result<Self> {
        check_length(n)?;
        check_rho(rho)?;
        if !u.is_finite() {
            return Err(crate::Error::invalid("u must be finite"));
        }
        let up = cholesky_upper(&ar1_covariance(n, rho))?;
        let m = up.mul(&quadratic_form(n, u)).mul(&up.transpose());
        let lambdas = symmetric_eigenvalues(&m)?;
        Ok(Self { n, rho, u, lambdas })
    }

    pub fn domain(&self) -> TDomain {
        let lo = self.lambdas[0];
        let hi = self.lambdas[self.lambdas.len() - 1];
        TDomain {
            lower: if lo < 0.0 { 0.5 / lo } else { f64::NEG_INFINITY },
            upper: if hi > 0.0 { 0.5 / hi } else { f64::INFINITY },
        }
    }

    pub fn eval(&self, t: f64) -> CgfEvaluation {
        let mut k = 0.0;
        let mut k1 = 0.0;
        let mut k2 = 0.0;
        for &l in &self.lambdas {
            let d = 1.0 - 2.0 * t * l;
            if !(d > 0.0) {
                return CgfEvaluation::outside();
            }
            k -= 0.5 * d.ln();
            let r = l / d;
            k1 += r;
            k2 += 2.0 * r * r;
        }
        CgfEvaluation { k, k10: k1, k20: k2, feasible: true }
    }
}

/// Closed-form conditional CGF for Gaussian errors: given C, the X₂ᵢ are
/// independent N(ρAᵢ/(1+ρ²), 1/(1+ρ²)).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianConditionalCgf {
    pub conditioning: OddConditioning,
    pub rho: f64,
}

impl GaussianConditionalCgf {
    pub fn new(conditioning: OddConditioning, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { conditioning, rho })
    }

    fn c(&self) -> f64 {
        1.0 + self.rho * self.rho
    }
}

impl ConditionalCgf for GaussianConditionalCgf {
    fn conditioning(&self) -> &OddConditioning {
        &self.conditioning
    }

    fn domain(&self, u: f64) -> TDomain {
        TDomain { lower: -self.c() / (2.0 * u), upper: f64::INFINITY }
    }

    fn eval(&self, t: f64, u: f64) -> Result<CgfEvaluation> {
        check_u(u)?;
        let c = self.c();
        let d = c + 2.0 * t * u;
        if !(d > 0.0) {
            return Ok(CgfEvaluation::outside());
        }
        let (a2, b) = (self.conditioning.a_bar_sq, self.conditioning.b_bar);
        let r = self.rho;
        let rt = r + t;
        // log(D/c) computed as ln_1p to keep K(0) exactly zero.
        let k = -0.5 * (2.0 * t * u / c).ln_1p() - t * u * b + a2 * (rt * rt / (2.0 * d) - r * r / (2.0 * c));
        let k10 = -u / d - u * b + a2 * (rt / d - u * rt * rt / (d * d));
        let g = c - 2.0 * u * r;
        let k20 = 2.0 * u * u / (d * d) + a2 * g * g / (d * d * d);
        Ok(CgfEvaluation { k, k10, k20, feasible: true })
    }

    fn conditional_moments(&self) -> Result<Vec<(f64, f64)>> {
        let c = self.c();
        Ok(self
            .conditioning
            .a
            .iter()
            .map(|a| {
                let mean = self.rho * a / c;
                (mean, 1.0 / c + mean * mean)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::{condition_decompose, simulate_ar1, ErrorDistribution};
    use crate::cgf::compute_u0;
    use crate::cgf::testutil::check_derivatives;

    #[test]
    fn unconditional_trace_identity() {
        for &(n, rho, u) in &[(9, 0.5, 0.6), (39, 0.5, 0.55), (15, -0.3, 0.1), (5, 0.0, 0.0)] {
            let g = GaussianUnconditionalCgf::new(n, rho, u).unwrap();
            let e = g.eval(0.0);
            assert_eq!(e.k, 0.0);
            let tr = quadratic_form(n, u).mul(&ar1_covariance(n, rho)).trace();
            assert!((e.k10 - tr).abs() < 1e-11 * (1.0 + tr.abs()), "{} vs {tr}", e.k10);
        }
        let g = GaussianUnconditionalCgf::new(7, 0.0, 0.0).unwrap();
        assert!(g.eval(0.0).k10.abs() < 1e-14);
    }

    #[test]
    fn unconditional_derivatives_and_domain() {
        let g = GaussianUnconditionalCgf::new(9, 0.5, 0.6).unwrap();
        let dom = g.domain();
        assert!(dom.lower < 0.0 && dom.upper > 0.0);
        for i in 1..10 {
            let t = dom.lower + (dom.upper - dom.lower) * f64::from(i) / 10.0;
            let e = g.eval(t);
            assert!(e.k20 > 0.0);
            let h = 1e-5;
            let d1 = (g.eval(t + h).k - g.eval(t - h).k) / (2.0 * h);
            assert!((d1 - e.k10).abs() < 1e-5 * (1.0 + e.k10.abs()));
        }
        assert!(!g.eval(dom.upper * 1.0001).feasible);
    }

    fn conditioning(m: usize, seed: u64) -> OddConditioning {
        let s = simulate_ar1(2 * m + 1, 0.5, ErrorDistribution::Normal, seed).unwrap();
        condition_decompose(&s)
    }

    #[test]
    fn conditional_zero_and_derivatives() {
        let g = GaussianConditionalCgf::new(conditioning(19, 4), 0.5).unwrap();
        for &u in &[0.2, 0.5, 0.8] {
            assert_eq!(g.eval(0.0, u).unwrap().k, 0.0);
            for &t in &[-0.3, 0.1, 0.7, 3.0] {
                check_derivatives(&g, t, u, 1e-5, 1e-6);
                assert!(g.eval(t, u).unwrap().k20 > 0.0);
            }
        }
        assert!(!g.eval(-10.0, 0.5).unwrap().feasible);
        assert!(g.eval(0.1, 0.0).is_err());
    }

    #[test]
    fn infeasible_margin_keeps_slope_negative() {
        let c = conditioning(19, 9);
        let g = GaussianConditionalCgf::new(c.clone(), 0.5).unwrap();
        let u = c.u_upper() * 1.05;
        assert!(c.feasibility_margin(u) < 0.0);
        for i in 1..200 {
            let t = 0.05 * f64::from(i) * f64::from(i);
            assert!(g.eval(t, u).unwrap().k10 < 0.0);
        }
    }

    #[test]
    fn slope_limit_is_margin() {
        let c = conditioning(19, 11);
        let g = GaussianConditionalCgf::new(c.clone(), 0.5).unwrap();
        let u = 0.6;
        let lim = c.feasibility_margin(u) / (4.0 * u);
        let far = g.eval(1e9, u).unwrap().k10;
        assert!((far - lim).abs() < 1e-6 * (1.0 + lim.abs()));
    }

    #[test]
    fn u0_zeroes_slope() {
        for seed in 0..20 {
            let g = GaussianConditionalCgf::new(conditioning(4 + seed as usize, seed), 0.5).unwrap();
            let r = compute_u0(&g).unwrap();
            let c = 1.25;
            let cd = &g.conditioning;
            let closed = (0.5 * cd.m as f64 * cd.a_bar_sq / c)
                / (cd.m as f64 / c + 0.25 * cd.m as f64 * cd.a_bar_sq / (c * c) + cd.m as f64 * cd.b_bar);
            assert!((r.u0 - closed).abs() < 1e-13);
            if r.u0 > 0.0 {
                assert!(g.eval(0.0, r.u0).unwrap().k10.abs() < 1e-10);
            }
        }
    }
}
