// SPDX-License-Identifier: MIT OR Apache-2.0

use super::{check_u, CgfEvaluation, ConditionalCgf, TDomain};
use crate::ar1::{check_rho, OddConditioning};
use crate::error::{Error, Result};
use crate::numerics::{integrate_on, log_sum_exp, Domain, Quadrature};

/// Above this series length, components more than `TRUNCATION` below the
/// per-index maximum log-weight are dropped (each carries weight < e⁻⁴⁰).
const EXACT_MAX_N: usize = 61;
const TRUNCATION: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    /// Residual indices (k, l).
    pub k: u32,
    pub l: u32,
    pub mean: f64,
    /// Normalized log-weight.
    pub log_weight: f64,
}

/// Conditional CGF when the error law is a Gaussian kernel mixture
/// (1/M)Σₖ N(eₖ, τ²); each g(z | X₂ᵢ₋₁, X₂ᵢ₊₁) is then a mixture of M²
/// normals with common variance τ²/(1+ρ₀²).
#[derive(Debug, Clone)]
pub struct MixtureConditionalCgf {
    conditioning: OddConditioning,
    rho0: f64,
    tau: f64,
    variance: f64,
    terms: Vec<Vec<MixtureComponent>>,
}

impl MixtureConditionalCgf {
    pub fn new(conditioning: OddConditioning, residuals: &[f64], rho0: f64, tau: f64) -> Result<Self> {
        check_rho(rho0)?;
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::invalid(format!("kernel bandwidth must be positive, got {tau}")));
        }
        if residuals.is_empty() {
            return Err(Error::invalid("mixture needs at least one residual"));
        }
        let c = 1.0 + rho0 * rho0;
        let variance = tau * tau / c;
        let n = 2 * conditioning.m + 1;
        let mut terms = Vec::with_capacity(conditioning.m);
        let mut raw = Vec::with_capacity(residuals.len() * residuals.len());
        for w in conditioning.odd.windows(2) {
            let (x1, x3) = (w[0], w[1]);
            let base = rho0 * (x1 + x3) / c;
            raw.clear();
            for (k, ek) in residuals.iter().enumerate() {
                for (l, el) in residuals.iter().enumerate() {
                    let r = x3 - rho0 * rho0 * x1 - rho0 * ek - el;
                    let lw = -r * r / (2.0 * tau * tau * c);
                    raw.push(MixtureComponent {
                        k: k as u32,
                        l: l as u32,
                        mean: base + (ek - rho0 * el) / c,
                        log_weight: lw,
                    });
                }
            }
            let top = raw.iter().map(|p| p.log_weight).fold(f64::NEG_INFINITY, f64::max);
            let mut kept: Vec<MixtureComponent> = if n > EXACT_MAX_N {
                raw.iter().copied().filter(|p| p.log_weight >= top - TRUNCATION).collect()
            } else {
                raw.clone()
            };
            let lws: Vec<f64> = kept.iter().map(|p| p.log_weight).collect();
            let norm = log_sum_exp(&lws);
            for p in &mut kept {
                p.log_weight -= norm;
            }
            terms.push(kept);
        }
        Ok(Self { conditioning, rho0, tau, variance, terms })
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Common component variance τ²/(1+ρ₀²).
    pub fn component_variance(&self) -> f64 {
        self.variance
    }

    /// Components of the conditional density of X₂ᵢ (0-based i).
    pub fn components(&self, i: usize) -> &[MixtureComponent] {
        &self.terms[i]
    }

    /// Conditional density of X₂ᵢ at z.
    pub fn density(&self, i: usize, z: f64) -> f64 {
        let v = self.variance;
        self.terms[i]
            .iter()
            .map(|p| p.log_weight.exp() * crate::numerics::normal::gaussian_pdf(z, p.mean, v))
            .sum()
    }

    /// Reference K, K₁₀ and K₂₀ by adaptive quadrature of each term,
    /// split at the component means. Cost grows like the square of the
    /// component count, so this is for checking the closed form.
    pub fn eval_by_quadrature(&self, t: f64, u: f64, quad: &Quadrature) -> Result<CgfEvaluation> {
        check_u(u)?;
        let v = self.variance;
        if !(1.0 + 2.0 * t * u * v > 0.0) {
            return Ok(CgfEvaluation::outside());
        }
        let c = &self.conditioning;
        let norm = (2.0 * std::f64::consts::PI * v).sqrt();
        let (mut k, mut k1, mut k2) = (0.0, 0.0, 0.0);
        for (i, a) in c.a.iter().enumerate() {
            let b = a / (2.0 * u);
            let comps = &self.terms[i];
            let h = |z: f64| -> f64 {
                let tilt = -t * u * (z - b) * (z - b);
                comps
                    .iter()
                    .map(|p| (p.log_weight + tilt - (z - p.mean).powi(2) / (2.0 * v)).exp())
                    .sum::<f64>()
                    / norm
            };
            let mut cuts: Vec<f64> = comps.iter().map(|p| p.mean).chain([b]).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let sd = v.sqrt();
            let moment = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
                let mut total = integrate_on(|z| g(z) * h(z), quad, Domain::Below { upper: cuts[0], scale: sd })?.value;
                for w in cuts.windows(2) {
                    total += integrate_on(|z| g(z) * h(z), quad, Domain::Finite { lower: w[0], upper: w[1] })?.value;
                }
                let last = cuts[cuts.len() - 1];
                total += integrate_on(|z| g(z) * h(z), quad, Domain::Above { lower: last, scale: sd })?.value;
                Ok(total)
            };
            let i0 = moment(&|_| 1.0)?;
            let mean = moment(&|z| u * (z - b) * (z - b))? / i0;
            let var = moment(&|z| (u * (z - b) * (z - b) - mean).powi(2))? / i0;
            k += i0.ln();
            k1 -= mean;
            k2 += var;
        }
        let mf = c.m as f64;
        let drift = c.feasibility_margin(u) / (4.0 * u);
        Ok(CgfEvaluation { k: k / mf + t * drift, k10: k1 / mf + drift, k20: k2 / mf, feasible: true })
    }

    /// Conditional CDF of X₂ᵢ at z.
    pub fn cdf(&self, i: usize, z: f64) -> f64 {
        let sd = self.variance.sqrt();
        self.terms[i]
            .iter()
            .map(|p| p.log_weight.exp() * crate::numerics::normal_cdf((z - p.mean) / sd))
            .sum()
    }
}

impl ConditionalCgf for MixtureConditionalCgf {
    fn conditioning(&self) -> &OddConditioning {
        &self.conditioning
    }

    fn domain(&self, u: f64) -> TDomain {
        TDomain { lower: -1.0 / (2.0 * u * self.variance), upper: f64::INFINITY }
    }

    fn eval(&self, t: f64, u: f64) -> Result<CgfEvaluation> {
        check_u(u)?;
        let s2 = self.variance;
        let d = 1.0 + 2.0 * t * u * s2;
        if !(d > 0.0) {
            return Ok(CgfEvaluation::outside());
        }
        let shrink = t * u / d;
        let c = &self.conditioning;
        let mf = c.m as f64;
        let (mut k, mut k1, mut k2) = (0.0, 0.0, 0.0);
        let mut ex = Vec::new();
        let mut dist = Vec::new();
        for (comps, a) in self.terms.iter().zip(&c.a) {
            let b = a / (2.0 * u);
            ex.clear();
            dist.clear();
            for p in comps {
                let dc = (b - p.mean) * (b - p.mean);
                dist.push(dc);
                ex.push(p.log_weight - shrink * dc);
            }
            let lse = log_sum_exp(&ex);
            let mut mean_d = 0.0;
            for (e, dc) in ex.iter_mut().zip(&dist) {
                *e = (*e - lse).exp();
                mean_d += *e * dc;
            }
            let var_d: f64 = ex.iter().zip(&dist).map(|(p, dc)| p * (dc - mean_d) * (dc - mean_d)).sum();
            k += -0.5 * (2.0 * t * u * s2).ln_1p() + lse;
            k1 += -u * s2 / d - u * mean_d / (d * d);
            k2 += 2.0 * u * u * s2 * s2 / (d * d) + 4.0 * u * u * s2 * mean_d / (d * d * d)
                + u * u * var_d / (d * d * d * d);
        }
        let drift = c.feasibility_margin(u) / (4.0 * u);
        Ok(CgfEvaluation {
            k: if t == 0.0 { 0.0 } else { k / mf + t * drift },
            k10: k1 / mf + drift,
            k20: k2 / mf,
            feasible: true,
        })
    }

    fn conditional_moments(&self) -> Result<Vec<(f64, f64)>> {
        Ok(self
            .terms
            .iter()
            .map(|comps| {
                comps.iter().fold((0.0, 0.0), |(m1, m2), p| {
                    let w = p.log_weight.exp();
                    (m1 + w * p.mean, m2 + w * (self.variance + p.mean * p.mean))
                })
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::{condition_decompose, simulate_ar1, ErrorDistribution};
    use crate::cgf::testutil::check_derivatives;
    use crate::cgf::{compute_u0, GaussianConditionalCgf};
    use rand::Rng as _;

    fn conditioning(m: usize, seed: u64) -> OddConditioning {
        condition_decompose(&simulate_ar1(2 * m + 1, 0.5, ErrorDistribution::Normal, seed).unwrap())
    }

    #[test]
    fn single_residual_is_gaussian_conditional() {
        for &m in &[4, 19] {
            let c = conditioning(m, 20 + m as u64);
            let mix = MixtureConditionalCgf::new(c.clone(), &[0.0], 0.5, 1.0).unwrap();
            let g = GaussianConditionalCgf::new(c, 0.5).unwrap();
            for &u in &[0.3, 0.45, 0.6, 0.75, 0.9] {
                for &t in &[-0.2, 0.0, 0.3, 1.0, 4.0] {
                    let a = mix.eval(t, u).unwrap();
                    let b = g.eval(t, u).unwrap();
                    assert!((a.k - b.k).abs() < 1e-12, "t={t} u={u}");
                    assert!((a.k10 - b.k10).abs() < 1e-12);
                    assert!((a.k20 - b.k20).abs() < 1e-12);
                }
            }
        }
    }

    fn random_mixture(m: usize, seed: u64) -> MixtureConditionalCgf {
        let mut rng = crate::rng::stream(seed, 1);
        let e: Vec<f64> = (0..5).map(|_| rng.random_range(-1.5..1.5)).collect();
        MixtureConditionalCgf::new(conditioning(m, seed), &e, 0.5, 0.6).unwrap()
    }

    #[test]
    fn weights_normalize() {
        let mix = random_mixture(6, 3);
        for i in 0..6 {
            let total: f64 = mix.components(i).iter().map(|p| p.log_weight.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert_eq!(mix.components(i).len(), 25);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let q = Quadrature { rel_tol: 1e-13, abs_tol: 1e-15, ..Quadrature::default() };
        for &m in &[4, 19] {
            let mix = random_mixture(m, 40 + m as u64);
            for &(t, u) in &[(0.4, 0.55), (-0.1, 0.3), (2.0, 0.8), (0.05, 0.45), (1.0, 0.6)] {
                let a = mix.eval(t, u).unwrap();
                let b = mix.eval_by_quadrature(t, u, &q).unwrap();
                assert!((a.k - b.k).abs() < 1e-8, "K m={m} t={t} u={u}: {} vs {}", a.k, b.k);
                assert!((a.k10 - b.k10).abs() < 1e-8, "K10 m={m} t={t} u={u}");
                assert!((a.k20 - b.k20).abs() < 1e-8, "K20 m={m} t={t} u={u}");
            }
        }
    }

    #[test]
    fn derivatives_and_u0() {
        let mix = random_mixture(19, 5);
        for &u in &[0.3, 0.6] {
            assert_eq!(mix.eval(0.0, u).unwrap().k, 0.0);
            for &t in &[-0.2, 0.3, 2.0] {
                check_derivatives(&mix, t, u, 1e-5, 1e-6);
                assert!(mix.eval(t, u).unwrap().k20 > 0.0);
            }
        }
        let u0 = compute_u0(&mix).unwrap().u0;
        assert!(u0 > 0.0);
        assert!(mix.eval(0.0, u0).unwrap().k10.abs() < 1e-10);
    }

    #[test]
    fn rho_zero_weights_ignore_k() {
        let c = OddConditioning::from_odd(vec![0.3, -0.8, 1.1]).unwrap();
        let e = [-1.0, 0.2, 0.8];
        let mix = MixtureConditionalCgf::new(c, &e, 0.0, 0.5).unwrap();
        for i in 0..2 {
            for p in mix.components(i) {
                let same_l = mix.components(i).iter().find(|q| q.l == p.l && q.k == 0).unwrap();
                assert_eq!(p.log_weight, same_l.log_weight);
            }
        }
    }

    #[test]
    fn extreme_bandwidth_is_stable() {
        let c = conditioning(19, 77);
        let mut rng = crate::rng::stream(77, 2);
        let e: Vec<f64> = (0..38).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mix = MixtureConditionalCgf::new(c, &e, 0.5, 1.0 / 19.0).unwrap();
        for i in 0..19 {
            let total: f64 = mix.components(i).iter().map(|p| p.log_weight.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let ev = mix.eval(0.7, 0.6).unwrap();
        assert!(ev.k.is_finite() && ev.k10.is_finite() && ev.k20 > 0.0);
    }
}
