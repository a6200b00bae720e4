// SPDX-License-Identifier: MIT OR Apache-2.0

use super::{check_u, CgfEvaluation, ConditionalCgf, TDomain};
use crate::ar1::{check_rho, ErrorDistribution, OddConditioning};
use crate::error::{Error, Result};
use crate::numerics::{integrate_on, Domain, Quadrature};

const GRID: usize = 201;
const GRID_HALF_WIDTH: f64 = 12.0;
const CORE_HALF_WIDTH: f64 = 8.0;

/// Conditional CGF for an arbitrary error law, by quadrature over
/// g(z | X₂ᵢ₋₁, X₂ᵢ₊₁) ∝ f(z − ρ₀X₂ᵢ₋₁)·f(X₂ᵢ₊₁ − ρ₀z).
#[derive(Debug, Clone)]
pub struct GeneralConditionalCgf {
    conditioning: OddConditioning,
    dist: ErrorDistribution,
    rho0: f64,
    quadrature: Quadrature,
    terms: Vec<Term>,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    x1: f64,
    x3: f64,
    lower: f64,
    upper: f64,
    /// log ∫ g̃, where g̃ is the unnormalized product density.
    log_norm: f64,
    mean: f64,
    second: f64,
}

impl GeneralConditionalCgf {
    pub fn new(conditioning: OddConditioning, dist: ErrorDistribution, rho0: f64) -> Result<Self> {
        let quadrature = Quadrature { rel_tol: 1e-12, ..Quadrature::default() };
        Self::with_quadrature(conditioning, dist, rho0, quadrature)
    }

    pub fn with_quadrature(
        conditioning: OddConditioning,
        dist: ErrorDistribution,
        rho0: f64,
        quadrature: Quadrature,
    ) -> Result<Self> {
        check_rho(rho0)?;
        dist.validate()?;
        let mut out = Self { conditioning, dist, rho0, quadrature, terms: Vec::new() };
        let odd = out.conditioning.odd.clone();
        for (i, w) in odd.windows(2).enumerate() {
            let (lower, upper) = out.support(w[0], w[1]);
            if !(lower < upper) {
                return Err(Error::degenerate(format!(
                    "conditional density of term {i} has empty support"
                )));
            }
            let mut term = Term { x1: w[0], x3: w[1], lower, upper, log_norm: 0.0, mean: 0.0, second: 0.0 };
            let (center, scale, shift) = out.locate(&term, 0.0, 0.0, 0.0);
            let h = |z: f64| (out.log_g(&term, z) - shift).exp();
            let i0 = out.integrate(h, &term, center, scale).map_err(|e| e.at_index(i))?;
            let i1 = out.integrate(|z| z * h(z), &term, center, scale).map_err(|e| e.at_index(i))?;
            let mean = i1 / i0;
            let var = out
                .integrate(|z| (z - mean) * (z - mean) * h(z), &term, center, scale)
                .map_err(|e| e.at_index(i))?
                / i0;
            term.log_norm = i0.ln() + shift;
            term.mean = mean;
            term.second = var + mean * mean;
            out.terms.push(term);
        }
        Ok(out)
    }

    pub fn distribution(&self) -> ErrorDistribution {
        self.dist
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    fn c(&self) -> f64 {
        1.0 + self.rho0 * self.rho0
    }

    /// Interval of z where both error arguments lie in the error support.
    fn support(&self, x1: f64, x3: f64) -> (f64, f64) {
        let (lo, hi) = self.dist.support();
        let r = self.rho0;
        // z − r·x1 ∈ [lo, hi]
        let mut a = lo + r * x1;
        let mut b = hi + r * x1;
        // x3 − r·z ∈ [lo, hi]
        if r > 0.0 {
            a = a.max((x3 - hi) / r);
            b = b.min((x3 - lo) / r);
        } else if r < 0.0 {
            a = a.max((x3 - lo) / r);
            b = b.min((x3 - hi) / r);
        }
        (a, b)
    }

    fn log_g(&self, term: &Term, z: f64) -> f64 {
        if z < term.lower || z > term.upper {
            return f64::NEG_INFINITY;
        }
        self.dist.log_density(z - self.rho0 * term.x1) + self.dist.log_density(term.x3 - self.rho0 * z)
    }

    /// Center, scale and log-maximum of log g̃(z) − tu(z − b)² on a grid.
    fn locate(&self, term: &Term, t: f64, u: f64, b: f64) -> (f64, f64, f64) {
        let c = self.c();
        let tilt = 2.0 * t * u;
        let prec = if c + tilt > 0.1 * c { c + tilt } else { c };
        let guess = (self.rho0 * (term.x1 + term.x3) + tilt * b) / prec;
        let sd = prec.sqrt().recip();
        let lo = (guess - GRID_HALF_WIDTH * sd).max(term.lower);
        let hi = (guess + GRID_HALF_WIDTH * sd).min(term.upper);
        let (lo, hi) = if lo < hi {
            (lo, hi)
        } else if term.lower.is_finite() && term.upper.is_finite() {
            (term.lower, term.upper)
        } else if guess < term.lower {
            (term.lower, (term.lower + 2.0 * GRID_HALF_WIDTH * sd).min(term.upper))
        } else {
            ((term.upper - 2.0 * GRID_HALF_WIDTH * sd).max(term.lower), term.upper)
        };
        let mut best = (f64::NEG_INFINITY, guess.clamp(lo, hi));
        for k in 0..GRID {
            let z = lo + (hi - lo) * k as f64 / (GRID - 1) as f64;
            let v = self.log_g(term, z) - t * u * (z - b) * (z - b);
            if v > best.0 {
                best = (v, z);
            }
        }
        (best.1, sd, best.0)
    }

    /// ∫ f over the support, split around `center` so the peak gets its own panel.
    fn integrate(&self, mut f: impl FnMut(f64) -> f64, term: &Term, center: f64, scale: f64) -> Result<f64> {
        let half = CORE_HALF_WIDTH * scale;
        let a = (center - half).max(term.lower);
        let b = (center + half).min(term.upper);
        let mut total = 0.0;
        if a < b {
            total += integrate_on(&mut f, &self.quadrature, Domain::Finite { lower: a, upper: b })?.value;
        }
        if term.lower < a {
            let dom = if term.lower.is_finite() {
                Domain::Finite { lower: term.lower, upper: a }
            } else {
                Domain::Below { upper: a, scale: half }
            };
            total += integrate_on(&mut f, &self.quadrature, dom)?.value;
        }
        if b < term.upper {
            let dom = if term.upper.is_finite() {
                Domain::Finite { lower: b, upper: term.upper }
            } else {
                Domain::Above { lower: b, scale: half }
            };
            total += integrate_on(&mut f, &self.quadrature, dom)?.value;
        }
        Ok(total)
    }

    /// log E[e^{−tL}], E_t[L], Var_t[L] for L = u(z − b)² under the tilted g.
    fn term_moments(&self, term: &Term, t: f64, u: f64, b: f64) -> Result<(f64, f64, f64)> {
        let (center, scale, shift) = self.locate(term, t, u, b);
        let h = |z: f64| {
            let v = self.log_g(term, z) - t * u * (z - b) * (z - b) - shift;
            v.exp()
        };
        let loss = |z: f64| u * (z - b) * (z - b);
        let i0 = self.integrate(h, term, center, scale)?;
        if !(i0 > 0.0) || !i0.is_finite() {
            return Err(Error::QuadratureFailure { estimate: i0, error: f64::NAN, index: None });
        }
        let mean = self.integrate(|z| loss(z) * h(z), term, center, scale)? / i0;
        let var = self.integrate(|z| (loss(z) - mean).powi(2) * h(z), term, center, scale)? / i0;
        Ok((i0.ln() + shift - term.log_norm, mean, var))
    }
}

impl ConditionalCgf for GeneralConditionalCgf {
    fn conditioning(&self) -> &OddConditioning {
        &self.conditioning
    }

    fn domain(&self, u: f64) -> TDomain {
        let bounded = self.terms.iter().all(|t| t.lower.is_finite() && t.upper.is_finite());
        let lower = match self.dist {
            ErrorDistribution::Normal => -self.c() / (2.0 * u),
            _ if bounded => f64::NEG_INFINITY,
            _ => 0.0,
        };
        TDomain { lower, upper: f64::INFINITY }
    }

    fn eval(&self, t: f64, u: f64) -> Result<CgfEvaluation> {
        check_u(u)?;
        if !self.domain(u).contains(t) {
            return Ok(CgfEvaluation::outside());
        }
        let c = &self.conditioning;
        let mf = c.m as f64;
        let drift = c.feasibility_margin(u) / (4.0 * u);
        let (mut k, mut k1, mut k2) = (0.0, 0.0, 0.0);
        for (i, (term, a)) in self.terms.iter().zip(&c.a).enumerate() {
            let b = a / (2.0 * u);
            let (li, mean, var) = self.term_moments(term, t, u, b).map_err(|e| e.at_index(i))?;
            k += li;
            k1 -= mean;
            k2 += var;
        }
        Ok(CgfEvaluation {
            k: if t == 0.0 { 0.0 } else { k / mf + t * drift },
            k10: k1 / mf + drift,
            k20: k2 / mf,
            feasible: true,
        })
    }

    fn conditional_moments(&self) -> Result<Vec<(f64, f64)>> {
        Ok(self.terms.iter().map(|t| (t.mean, t.second)).collect())
    }
}
