// SPDX-License-Identifier: MIT OR Apache-2.0

//! Saddlepoint tail probabilities P(S ≥ 0) = P(R ≥ u) with the
//! Barndorff-Nielsen correction.
//!
//! Conditional CGFs are per-m averages, so the deviate is √m·W⁺ with
//! W⁺ = W − log Ψ/(mW). The unconditional CGF is total-scale (m = 1).

use crate::ar1::{condition_decompose, Ar1Model, ErrorDistribution, TailEstimate};
use crate::cgf::{
    compute_u0, CgfEvaluation, ConditionalCgf, GaussianConditionalCgf, GaussianUnconditionalCgf,
    GeneralConditionalCgf, TDomain,
};
use crate::error::{Error, Result};
use crate::numerics::{bisect_increasing, gauss_legendre, normal_upper_tail, solve_increasing, RootBracket};
use crate::rng;
use serde::{Deserialize, Serialize};

/// Below this |√m·W| the deviate is assembled from an integral form of W
/// that avoids cancellation in −2K(t̂).
const SMALL_DEVIATE: f64 = 0.1;
/// Below this |√m·W| the correction is replaced by its limit at W = 0.
const LIMIT_DEVIATE: f64 = 1e-6;
const MAX_DOUBLINGS: i32 = 60;
const LEGENDRE_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    pub u: f64,
    pub u0: f64,
    pub t_hat: f64,
    pub w: f64,
    pub psi: f64,
    pub w_plus: f64,
    pub tail: f64,
    /// Ā² − 4u²B̄ > 0 (conditional), or S takes both signs (unconditional).
    pub feasible: bool,
    pub m: usize,
}

impl SaddleResult {
    fn degenerate(u: f64, u0: f64, m: usize, tail: f64) -> Self {
        Self { u, u0, t_hat: f64::NAN, w: f64::NAN, psi: f64::NAN, w_plus: f64::NAN, tail, feasible: false, m }
    }
}

struct Problem<'a> {
    eval: &'a dyn Fn(f64) -> Result<CgfEvaluation>,
    domain: TDomain,
    m: f64,
    u: f64,
    u0: f64,
}

impl Problem<'_> {
    fn at(&self, t: f64) -> Result<CgfEvaluation> {
        let e = (self.eval)(t)?;
        if !e.feasible {
            return Err(self.failure(t, t, format!("t = {t} is outside the CGF domain")));
        }
        Ok(e)
    }

    fn failure(&self, lower: f64, upper: f64, reason: String) -> Error {
        Error::SaddleFailure { u: self.u, u0: self.u0, lower, upper, reason }
    }

    /// Root of K₁₀(·, u); `start` is the first positive trial point on an
    /// unbounded side.
    fn solve(&self, k10_at_0: f64, start: f64) -> Result<f64> {
        if k10_at_0 == 0.0 {
            return Ok(0.0);
        }
        let dir = if k10_at_0 < 0.0 { 1.0 } else { -1.0 };
        let edge = if dir > 0.0 { self.domain.upper } else { self.domain.lower };
        if edge == 0.0 {
            return Err(self.failure(
                self.domain.lower,
                self.domain.upper,
                "saddlepoint lies outside the admissible range of t".into(),
            ));
        }
        let mut inner = 0.0;
        let mut outer = None;
        for k in 1..=MAX_DOUBLINGS {
            let t = if edge.is_finite() { edge * (1.0 - 0.5f64.powi(k)) } else { dir * start * 2f64.powi(k - 1) };
            let g = self.at(t)?.k10;
            if g * dir > 0.0 {
                outer = Some(t);
                break;
            }
            if g == 0.0 {
                return Ok(t);
            }
            inner = t;
        }
        let outer = outer.ok_or_else(|| self.failure(inner, edge, "no sign change of K10 before the domain edge".into()))?;
        let bracket = if dir > 0.0 { RootBracket::new(inner, outer)? } else { RootBracket::new(outer, inner)? };
        let scale = 1.0 + k10_at_0.abs();
        let t = solve_increasing(|t| self.at(t).map(|e| (e.k10, e.k20)), bracket, 1e-13 * scale)
            .map_err(|e| self.failure(bracket.lower, bracket.upper, e.to_string()))?;
        let resid = self.at(t)?.k10;
        if resid.abs() > 1e-10 * scale {
            return Err(self.failure(bracket.lower, bracket.upper, format!("residual {resid:e} after solve")));
        }
        Ok(t)
    }

    /// K₃₀ by differences of K₂₀, one-sided at the domain edge.
    fn k30(&self, t: f64, k20: f64) -> Result<f64> {
        let h = 1e-4 * (1.0 + t.abs());
        let up = self.domain.contains(t + h) && self.domain.contains(t + 2.0 * h);
        let down = self.domain.contains(t - h) && self.domain.contains(t - 2.0 * h);
        if up && down {
            Ok((self.at(t + h)?.k20 - self.at(t - h)?.k20) / (2.0 * h))
        } else if up {
            Ok((-3.0 * k20 + 4.0 * self.at(t + h)?.k20 - self.at(t + 2.0 * h)?.k20) / (2.0 * h))
        } else {
            Ok((3.0 * k20 - 4.0 * self.at(t - h)?.k20 + self.at(t - 2.0 * h)?.k20) / (2.0 * h))
        }
    }

    /// Limit of −log Ψ/(√m W) as W → 0: the standardized skewness over 6.
    fn skew_shift(&self, t: f64, k20: f64) -> Result<f64> {
        Ok(self.k30(t, k20)? / (6.0 * self.m.sqrt() * k20.powf(1.5)))
    }

    /// (W, Ψ, √m·W⁺) at the saddlepoint.
    fn deviate(&self, t: f64) -> Result<(f64, f64, f64)> {
        let e = self.at(t)?;
        let sm = self.m.sqrt();
        if t == 0.0 {
            return Ok((0.0, 1.0, self.skew_shift(0.0, e.k20)?));
        }
        let sign = t.signum();
        let w_direct = sign * (-2.0 * e.k).max(0.0).sqrt();
        if (sm * w_direct).abs() >= SMALL_DEVIATE {
            let psi = w_direct / (t * e.k20.sqrt());
            return Ok((w_direct, psi, sm * w_direct - psi.ln() / (sm * w_direct)));
        }
        // W² = 2∫₀ᵗ rK₂₀(r)dr, so W²/(t²K₂₀(t)) = 1 + 2∫₀¹ x(K₂₀(tx) − K₂₀(t))/K₂₀(t) dx.
        let (nodes, weights) = gauss_legendre(LEGENDRE_NODES);
        let mut excess = 0.0;
        for (x, wt) in nodes.iter().zip(&weights) {
            let s = 0.5 * (x + 1.0);
            excess += wt * s * (self.at(t * s)?.k20 - e.k20);
        }
        excess /= e.k20;
        let log_psi = 0.5 * excess.ln_1p();
        let w = sign * t.abs() * e.k20.sqrt() * log_psi.exp();
        let r = sm * w;
        let root = if r.abs() < LIMIT_DEVIATE { r + self.skew_shift(t, e.k20)? } else { r - log_psi / r };
        Ok((w, log_psi.exp(), root))
    }

    fn result(&self, t_hat: f64, m: usize) -> Result<SaddleResult> {
        let (w, psi, root) = self.deviate(t_hat)?;
        let tail = normal_upper_tail(root).clamp(0.0, 1.0);
        Ok(SaddleResult {
            u: self.u,
            u0: self.u0,
            t_hat,
            w,
            psi,
            w_plus: root / self.m.sqrt(),
            tail,
            feasible: true,
            m,
        })
    }
}

/// Saddlepoint approximation to P(R ≥ u | C).
pub fn conditional_tail(cgf: &dyn ConditionalCgf, u: f64) -> Result<SaddleResult> {
    crate::cgf::check_u(u)?;
    let c = cgf.conditioning();
    let m = c.m;
    let u0 = compute_u0(cgf)?.u0;
    if !c.is_feasible(u) {
        return Ok(SaddleResult::degenerate(u, u0, m, 0.0));
    }
    let eval = |t: f64| cgf.eval(t, u);
    let p = Problem { eval: &eval, domain: cgf.domain(u), m: m as f64, u, u0 };
    let k10_0 = p.at(0.0)?.k10;
    let start = 1.0 / (4.0 * u * c.b_bar + f64::EPSILON);
    let t_hat = p.solve(k10_0, start)?;
    p.result(t_hat, m)
}

/// Saddlepoint approximation to P(R ≥ u) for a stationary Gaussian AR(1).
pub fn gaussian_unconditional_tail(n: usize, rho: f64, u: f64) -> Result<SaddleResult> {
    if !(u.abs() < 1.0) {
        return Err(Error::invalid(format!("u must lie in (-1, 1), got {u}")));
    }
    let g = GaussianUnconditionalCgf::new(n, rho, u)?;
    unconditional_from(&g)
}

pub(crate) fn unconditional_from(g: &GaussianUnconditionalCgf) -> Result<SaddleResult> {
    let m = (g.n - 1) / 2;
    // κ'(0) = trace((A − uB)Σ) vanishes at u = ρ.
    let u0 = g.rho;
    let (lo, hi) = (g.lambdas[0], g.lambdas[g.lambdas.len() - 1]);
    if hi <= 0.0 {
        return Ok(SaddleResult::degenerate(g.u, u0, m, 0.0));
    }
    if lo >= 0.0 {
        return Ok(SaddleResult::degenerate(g.u, u0, m, 1.0));
    }
    let eval = |t: f64| Ok(g.eval(t));
    let p = Problem { eval: &eval, domain: g.domain(), m: 1.0, u: g.u, u0 };
    let k10_0 = g.eval(0.0).k10;
    let t_hat = p.solve(k10_0, 1.0)?;
    let mut r = p.result(t_hat, m)?;
    r.feasible = true;
    Ok(r)
}

/// Conditional backend used when averaging over simulated conditioning sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionalBackend {
    /// Closed form; the model's errors must be normal.
    Gaussian,
    /// Quadrature with the model's error density.
    General,
}

/// Average of conditional tails over simulated conditioning sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTail {
    pub u: f64,
    pub estimate: TailEstimate,
    /// Conditioning sets whose saddlepoint failed (excluded from the mean).
    pub failures: u64,
    /// Conditioning sets with Ā² − 4u²B̄ ≤ 0 (counted as zero).
    pub infeasible: u64,
}

/// Largest tolerated fraction of failed conditioning sets.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

/// E[P(R ≥ u | C)] for every u in `u_grid`, averaging over `n_cond`
/// independently simulated series.
pub fn expected_conditional_tails(
    model: &Ar1Model,
    u_grid: &[f64],
    backend: ConditionalBackend,
    n_cond: usize,
    seed: u64,
) -> Result<Vec<ExpectedTail>> {
    if n_cond == 0 {
        return Err(Error::invalid("n_cond must be at least 1"));
    }
    if backend == ConditionalBackend::Gaussian && model.dist != ErrorDistribution::Normal {
        return Err(Error::invalid("the Gaussian backend needs normal errors"));
    }
    for &u in u_grid {
        crate::cgf::check_u(u)?;
    }
    let per_draw: Vec<Result<Vec<Option<(f64, bool)>>>> = rng::par_items(n_cond, seed, |rng, _| {
        let series = model.draw(rng);
        let c = condition_decompose(&series);
        let cgf: Box<dyn ConditionalCgf> = match backend {
            ConditionalBackend::Gaussian => Box::new(GaussianConditionalCgf::new(c, model.rho)?),
            ConditionalBackend::General => match GeneralConditionalCgf::new(c, model.dist, model.rho) {
                Ok(g) => Box::new(g),
                Err(_) => return Ok(vec![None; u_grid.len()]),
            },
        };
        Ok(u_grid
            .iter()
            .map(|&u| match conditional_tail(cgf.as_ref(), u) {
                Ok(r) => Some((r.tail, r.feasible)),
                Err(_) => None,
            })
            .collect())
    });
    let mut out = Vec::with_capacity(u_grid.len());
    for (j, &u) in u_grid.iter().enumerate() {
        let mut values = Vec::with_capacity(n_cond);
        let (mut failures, mut infeasible) = (0u64, 0u64);
        for draw in &per_draw {
            match draw.as_ref().map_err(Clone::clone)?[j] {
                Some((tail, feasible)) => {
                    infeasible += u64::from(!feasible);
                    values.push(tail);
                }
                None => failures += 1,
            }
        }
        if failures as f64 > MAX_FAILURE_RATE * n_cond as f64 || values.is_empty() {
            return Err(Error::SaddleFailure {
                u,
                u0: f64::NAN,
                lower: f64::NAN,
                upper: f64::NAN,
                reason: format!("{failures} of {n_cond} conditioning sets failed"),
            });
        }
        out.push(ExpectedTail { u, estimate: TailEstimate::from_average(&values, seed), failures, infeasible });
    }
    Ok(out)
}

pub fn expected_conditional_tail(
    model: &Ar1Model,
    u: f64,
    backend: ConditionalBackend,
    n_cond: usize,
    seed: u64,
) -> Result<ExpectedTail> {
    expected_conditional_tails(model, &[u], backend, n_cond, seed).map(|mut v| v.remove(0))
}

/// The u in `search` where the nonincreasing `tail_fn` crosses `level`,
/// to within `1e-9` in u.
pub fn critical_value<F>(mut tail_fn: F, level: f64, search: RootBracket) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("level must lie in (0, 1), got {level}")));
    }
    bisect_increasing(|u| tail_fn(u).map(|p| level - p), search, 1e-9)
}

/// Level-`level` critical value of the conditional saddlepoint tail.
pub fn conditional_critical_value(cgf: &dyn ConditionalCgf, level: f64) -> Result<f64> {
    let upper = cgf.conditioning().u_upper();
    let search = RootBracket::new(upper * 1e-9, upper)?;
    critical_value(|u| conditional_tail(cgf, u).map(|r| r.tail), level, search)
}

/// Level-`level` critical value of the unconditional Gaussian saddlepoint tail.
pub fn unconditional_critical_value(n: usize, rho: f64, level: f64) -> Result<f64> {
    let search = RootBracket::new(-0.999, 0.999)?;
    critical_value(|u| gaussian_unconditional_tail(n, rho, u).map(|r| r.tail), level, search)
}
