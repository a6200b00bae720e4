// SPDX-License-Identifier: MIT OR Apache-2.0

//! Cumulant generating functions of S = Σ XᵢXᵢ₋₁ − u·(half-weighted sum of
//! squares), unconditionally for Gaussian errors and conditionally on the
//! odd-indexed observations for Gaussian, general and Gaussian-mixture laws.
//!
//! Conditional backends return the per-m average: K(t,u) = (1/m)·log E[e^{tS}|C].

mod gaussian;
mod general;
mod mixture;

pub use gaussian::{GaussianConditionalCgf, GaussianUnconditionalCgf};
pub use general::GeneralConditionalCgf;
pub use mixture::{MixtureComponent, MixtureConditionalCgf};

use crate::ar1::OddConditioning;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgfEvaluation {
    pub k: f64,
    pub k10: f64,
    pub k20: f64,
    pub feasible: bool,
}

impl CgfEvaluation {
    pub(crate) fn outside() -> Self {
        Self { k: f64::NAN, k10: f64::NAN, k20: f64::NAN, feasible: false }
    }
}

/// Admissible saddlepoints: the open interval `(lower, upper)`, plus t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TDomain {
    pub lower: f64,
    pub upper: f64,
}

impl TDomain {
    pub fn contains(&self, t: f64) -> bool {
        t == 0.0 || (t > self.lower && t < self.upper)
    }
}

/// A CGF of S conditional on the odd-indexed observations.
pub trait ConditionalCgf: Sync {
    fn conditioning(&self) -> &OddConditioning;

    fn domain(&self, u: f64) -> TDomain;

    /// K, K₁₀, K₂₀ at (t, u); `feasible = false` outside [`Self::domain`].
    fn eval(&self, t: f64, u: f64) -> Result<CgfEvaluation>;

    /// (E[X₂ᵢ | C], E[X₂ᵢ² | C]) for each i.
    fn conditional_moments(&self) -> Result<Vec<(f64, f64)>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U0Result {
    pub u0: f64,
    pub numerator: f64,
    pub denominator: f64,
}

/// The u with K₁₀(0, u) = 0, from the first two conditional moments.
pub fn compute_u0(cgf: &dyn ConditionalCgf) -> Result<U0Result> {
    let c = cgf.conditioning();
    let moments = cgf.conditional_moments()?;
    let numerator: f64 = moments.iter().zip(&c.a).map(|((m1, _), a)| a * m1).sum();
    let denominator: f64 = moments.iter().map(|(_, m2)| m2).sum::<f64>() + c.m as f64 * c.b_bar;
    if !(denominator > 0.0) {
        return Err(Error::degenerate("u0 denominator is not positive"));
    }
    Ok(U0Result { u0: numerator / denominator, numerator, denominator })
}

pub(crate) fn check_u(u: f64) -> Result<()> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::invalid(format!("conditional CGFs need u > 0, got {u}")));
    }
    Ok(())
}
