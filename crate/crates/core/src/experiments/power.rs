// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::ar1::{condition_decompose, serial_correlation, Ar1Model, ErrorDistribution, TailEstimate};
use crate::cgf::{ConditionalCgf, GaussianConditionalCgf};
use crate::error::{Error, Result};
use crate::numerics::RootBracket;
use crate::rng;
use crate::saddlepoint::{conditional_tail, critical_value, gaussian_unconditional_tail, unconditional_critical_value};
use serde::{Deserialize, Serialize};

/// Power of the level-`level` tests of ρ = ρ₀ against ρ = ρ₁ > ρ₀, Gaussian errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub rho0: f64,
    pub rho1: f64,
    pub level: f64,
    /// Unconditional critical value for R.
    pub u_critical: f64,
    /// Simulated rejection rate of R > u_critical under ρ₁.
    pub unconditional: TailEstimate,
    /// Saddlepoint P(R > u_critical) under ρ₁.
    pub unconditional_sp: f64,
    /// Simulated rejection rate of R > c(C) under ρ₁.
    pub conditional: TailEstimate,
    /// Average over the simulated C of the ρ₁ conditional saddlepoint at c(C).
    pub conditional_sp: TailEstimate,
    /// Conditioning sets where a saddlepoint failed (excluded).
    pub failures: u64,
}

/// Level-`level` critical value of the conditional law under ρ₀; when even
/// the smallest searched u has a tail below `level`, that u is returned.
pub fn conditional_critical_value_or_edge(cgf: &dyn ConditionalCgf, level: f64) -> Result<f64> {
    let upper = cgf.conditioning().u_upper();
    let lower = upper * 1e-9;
    if conditional_tail(cgf, lower)?.tail <= level {
        return Ok(lower);
    }
    critical_value(|u| conditional_tail(cgf, u).map(|r| r.tail), level, RootBracket::new(lower, upper)?)
}

pub fn gaussian_power(n: usize, rho0: f64, rho1: f64, level: f64, sims: usize, seed: u64) -> Result<PowerResult> {
    if sims == 0 {
        return Err(Error::invalid("sims must be at least 1"));
    }
    if rho1 < rho0 {
        return Err(Error::invalid(format!("rho1 = {rho1} must not be below rho0 = {rho0}")));
    }
    let u_critical = unconditional_critical_value(n, rho0, level)?;
    let unconditional_sp = gaussian_unconditional_tail(n, rho1, u_critical)?.tail;
    let model = Ar1Model::new(n, rho1, ErrorDistribution::Normal)?;
    // Per draw: (U reject, C reject and C saddlepoint power) or None on failure.
    let per_draw: Vec<Result<(bool, Option<(bool, f64)>)>> = rng::par_items(sims, seed, |rng, _| {
        let series = model.draw(rng);
        let r = serial_correlation(&series)?;
        let c = condition_decompose(&series);
        let h0 = GaussianConditionalCgf::new(c.clone(), rho0)?;
        let h1 = GaussianConditionalCgf::new(c, rho1)?;
        let cond = conditional_critical_value_or_edge(&h0, level)
            .and_then(|crit| conditional_tail(&h1, crit).map(|t| (r > crit, t.tail)))
            .ok();
        Ok((r > u_critical, cond))
    });
    let (mut u_hits, mut c_hits, mut failures) = (0u64, 0u64, 0u64);
    let mut sp = Vec::with_capacity(sims);
    for d in per_draw {
        let (u_rej, cond) = d?;
        u_hits += u64::from(u_rej);
        match cond {
            Some((c_rej, p)) => {
                c_hits += u64::from(c_rej);
                sp.push(p);
            }
            None => failures += 1,
        }
    }
    let ok = sims as u64 - failures;
    if ok == 0 {
        return Err(Error::degenerate("every conditional critical value failed"));
    }
    Ok(PowerResult {
        rho0,
        rho1,
        level,
        u_critical,
        unconditional: TailEstimate::from_counts(u_hits, sims as u64, seed),
        unconditional_sp,
        conditional: TailEstimate::from_counts(c_hits, ok, seed),
        conditional_sp: TailEstimate::from_average(&sp, seed),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_equals_level_under_null() {
        let p = gaussian_power(39, 0.3, 0.3, 0.05, 4000, 7).unwrap();
        assert!((p.unconditional_sp - 0.05).abs() < 1e-6);
        for est in [p.unconditional, p.conditional] {
            assert!((est.probability - 0.05).abs() < 3.0 * (0.05f64 * 0.95 / 4000.0).sqrt() + 0.005, "{p:?}");
        }
        assert!((p.conditional_sp.probability - 0.05).abs() < 1e-3, "{p:?}");
    }

    #[test]
    fn rejects_reversed_alternative() {
        assert!(gaussian_power(39, 0.3, 0.2, 0.05, 10, 1).is_err());
    }
}
