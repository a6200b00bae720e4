// SPDX-License-Identifier: MIT OR Apache-2.0

//! AR(1) data model: error laws, simulation, the serial correlation statistic
//! and the split of a path into odd-indexed conditioning values and
//! even-indexed free values.

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use libm::lgamma as ln_gamma;
use rand::distr::Distribution;
use rand_distr::{Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Innovation law, always with mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorDistribution {
    Normal,
    /// Student t scaled by √((ν−2)/ν).
    StudentT { dof: u32 },
    /// Rate-1 exponential shifted by −1.
    CenteredExponential,
}

impl ErrorDistribution {
    /// Smallest ν for which the eighth moment exists.
    pub const MIN_T_DOF: u32 = 9;

    pub fn student_t(dof: u32) -> Result<Self> {
        if dof < Self::MIN_T_DOF {
            return Err(Error::invalid(format!(
                "student-t needs at least {} degrees of freedom, got {dof}",
                Self::MIN_T_DOF
            )));
        }
        Ok(Self::StudentT { dof })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::StudentT { dof } => Self::student_t(dof).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Self::CenteredExponential)
    }

    fn t_scale(dof: u32) -> f64 {
        let v = f64::from(dof);
        (v / (v - 2.0)).sqrt()
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            Self::Normal => StandardNormal.sample(rng),
            Self::StudentT { dof } => {
                let t: f64 = StudentT::new(f64::from(dof))
                    .expect("validated dof")
                    .sample(rng);
                t / Self::t_scale(dof)
            }
            Self::CenteredExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
        }
    }

    /// Closed support interval (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::CenteredExponential => (-1.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Self::Normal => crate::numerics::normal::log_normal_pdf(x),
            Self::StudentT { dof } => {
                let v = f64::from(dof);
                let s = Self::t_scale(dof);
                let y = x * s;
                ln_gamma(0.5 * (v + 1.0))
                    - ln_gamma(0.5 * v)
                    - 0.5 * (v * std::f64::consts::PI).ln()
                    - 0.5 * (v + 1.0) * (y * y / v).ln_1p()
                    + s.ln()
            }
            Self::CenteredExponential => {
                if x >= -1.0 {
                    -(x + 1.0)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }
}

impl fmt::Display for ErrorDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal => write!(f, "normal"),
            Self::StudentT { dof } => write!(f, "t{dof}"),
            Self::CenteredExponential => write!(f, "exp"),
        }
    }
}

impl FromStr for ErrorDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Self::Normal),
            "exp" | "exponential" => Ok(Self::CenteredExponential),
            other => match other.strip_prefix('t').map(str::parse::<u32>) {
                Some(Ok(dof)) => Self::student_t(dof),
                _ => Err(Error::Parse(format!("unknown error distribution '{s}'"))),
            },
        }
    }
}

/// An odd-length AR(1) path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ar1Series {
    x: Vec<f64>,
    /// Generating coefficient; `None` for observed data.
    rho: Option<f64>,
}

impl Ar1Series {
    pub fn new(x: Vec<f64>, rho: Option<f64>) -> Result<Self> {
        check_length(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("series contains non-finite values"));
        }
        if let Some(r) = rho {
            check_rho(r)?;
        }
        Ok(Self { x, rho })
    }

    pub fn observed(x: Vec<f64>) -> Result<Self> {
        Self::new(x, None)
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        (self.x.len() - 1) / 2
    }
}

pub(crate) fn check_length(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::invalid(format!("series length must be odd and at least 3, got {n}")));
    }
    Ok(())
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return Err(Error::invalid(format!("|rho| must be below 1, got {rho}")));
    }
    Ok(())
}

/// Fills `x` with an AR(1) path: X₁ = ε₀/√(1−ρ²), Xᵢ = ρXᵢ₋₁ + εᵢ.
pub(crate) fn fill_ar1(x: &mut [f64], rho: f64, dist: ErrorDistribution, rng: &mut Rng) {
    let init = 1.0 / (1.0 - rho * rho).sqrt();
    x[0] = dist.sample(rng) * init;
    for i in 1..x.len() {
        x[i] = rho * x[i - 1] + dist.sample(rng);
    }
}

pub fn simulate_ar1(n: usize, rho: f64, dist: ErrorDistribution, seed: u64) -> Result<Ar1Series> {
    check_length(n)?;
    check_rho(rho)?;
    dist.validate()?;
    let mut rng = rng::stream(seed, 0);
    let mut x = vec![0.0; n];
    fill_ar1(&mut x, rho, dist, &mut rng);
    Ok(Ar1Series { x, rho: Some(rho) })
}

/// Generating model for simulated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub n: usize,
    pub rho: f64,
    pub dist: ErrorDistribution,
}

impl Ar1Model {
    pub fn new(n: usize, rho: f64, dist: ErrorDistribution) -> Result<Self> {
        check_length(n)?;
        check_rho(rho)?;
        dist.validate()?;
        Ok(Self { n, rho, dist })
    }

    pub fn m(&self) -> usize {
        (self.n - 1) / 2
    }

    /// A path drawn from `rng`.
    pub fn draw(&self, rng: &mut Rng) -> Ar1Series {
        let mut x = vec![0.0; self.n];
        fill_ar1(&mut x, self.rho, self.dist, rng);
        Ar1Series { x, rho: Some(self.rho) }
    }
}

/// Σ XᵢXᵢ₋₁ and the half-weighted sum of squares.
#[inline]
pub(crate) fn ratio_parts(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mut num = 0.0;
    let mut den = 0.5 * (x[0] * x[0] + x[n - 1] * x[n - 1]);
    for i in 1..n {
        num += x[i] * x[i - 1];
    }
    for v in &x[1..n - 1] {
        den += v * v;
    }
    (num, den)
}

/// First serial correlation coefficient R.
pub fn serial_correlation(series: &Ar1Series) -> Result<f64> {
    let (num, den) = ratio_parts(&series.x);
    if !(den > 0.0) {
        return Err(Error::degenerate("serial correlation denominator is zero"));
    }
    Ok(num / den)
}

/// S(u) = Σ XᵢXᵢ₋₁ − u·(half-weighted sum of squares); S > 0 exactly when R > u.
pub fn statistic_s(series: &Ar1Series, u: f64) -> f64 {
    let (num, den) = ratio_parts(&series.x);
    num - u * den
}

/// Quantities derived from the odd-indexed observations X₁, X₃, …, Xₙ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddConditioning {
    pub odd: Vec<f64>,
    /// Aᵢ = X₂ᵢ₋₁ + X₂ᵢ₊₁.
    pub a: Vec<f64>,
    /// Bᵢ = (X₂ᵢ₋₁² + X₂ᵢ₊₁²)/2.
    pub b: Vec<f64>,
    pub m: usize,
    pub a_bar_sq: f64,
    pub b_bar: f64,
}

impl OddConditioning {
    /// From the m+1 odd-indexed values.
    pub fn from_odd(odd: Vec<f64>) -> Result<Self> {
        if odd.len() < 2 {
            return Err(Error::invalid("need at least two odd-indexed observations"));
        }
        let m = odd.len() - 1;
        let a: Vec<f64> = odd.windows(2).map(|w| w[0] + w[1]).collect();
        let b: Vec<f64> = odd.windows(2).map(|w| 0.5 * (w[0] * w[0] + w[1] * w[1])).collect();
        let mf = m as f64;
        let a_bar_sq = a.iter().map(|v| v * v).sum::<f64>() / mf;
        let b_bar = b.iter().sum::<f64>() / mf;
        Ok(Self { odd, a, b, m, a_bar_sq, b_bar })
    }

    /// Ā² − 4u²B̄; the conditional tail at u > 0 is zero unless this is positive.
    pub fn feasibility_margin(&self, u: f64) -> f64 {
        self.a_bar_sq - 4.0 * u * u * self.b_bar
    }

    pub fn is_feasible(&self, u: f64) -> bool {
        self.feasibility_margin(u) > 0.0
    }

    /// Largest u with a nonzero conditional tail, √(Ā²/4B̄).
    pub fn u_upper(&self) -> f64 {
        (self.a_bar_sq / (4.0 * self.b_bar)).sqrt()
    }

    /// R for even-indexed values `even` (length m) combined with these odd values.
    #[inline]
    pub fn ratio_with_even(&self, even: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((z, a), b) in even.iter().zip(&self.a).zip(&self.b) {
            num += a * z;
            den += z * z + b;
        }
        num / den
    }

    /// S via the completed-square form −uΣ(X₂ᵢ − Aᵢ/2u)² + m(Ā² − 4u²B̄)/(4u).
    pub fn s_completed_square(&self, even: &[f64], u: f64) -> f64 {
        let sq: f64 = even
            .iter()
            .zip(&self.a)
            .map(|(z, a)| (z - a / (2.0 * u)).powi(2))
            .sum();
        -u * sq + self.m as f64 * self.feasibility_margin(u) / (4.0 * u)
    }
}

pub fn condition_decompose(series: &Ar1Series) -> OddConditioning {
    let odd: Vec<f64> = series.x.iter().step_by(2).copied().collect();
    OddConditioning::from_odd(odd).expect("validated odd length")
}

pub fn even_values(series: &Ar1Series) -> Vec<f64> {
    series.x.iter().skip(1).step_by(2).copied().collect()
}

/// Residuals εᵢ = Xᵢ − ρ₀Xᵢ₋₁ (i = 2..n) and their standardized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSet {
    pub raw: Vec<f64>,
    pub standardized: Vec<f64>,
    pub mean: f64,
    /// Root mean square deviation, divisor = number of residuals.
    pub scale: f64,
}

pub fn compute_residuals(series: &Ar1Series, rho0: f64) -> Result<ResidualSet> {
    check_rho(rho0)?;
    let raw: Vec<f64> = series.x.windows(2).map(|w| w[1] - rho0 * w[0]).collect();
    let count = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / count;
    let var = raw.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / count;
    let scale = var.sqrt();
    if !(scale > 0.0) || scale < 1e-300 {
        return Err(Error::degenerate("residuals have zero spread"));
    }
    let standardized = raw.iter().map(|e| (e - mean) / scale).collect();
    Ok(ResidualSet { raw, standardized, mean, scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostic {
    pub eighth_moment_mean: f64,
    pub second_moment_mean: f64,
}

/// Means of X⁸ and X² over the odd-indexed observations.
pub fn moment_diagnostic(series: &Ar1Series) -> MomentDiagnostic {
    let odd: Vec<f64> = series.x.iter().step_by(2).copied().collect();
    let k = odd.len() as f64;
    MomentDiagnostic {
        eighth_moment_mean: odd.iter().map(|v| v.powi(8)).sum::<f64>() / k,
        second_moment_mean: odd.iter().map(|v| v * v).sum::<f64>() / k,
    }
}

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub replicates: u64,
    pub std_error: f64,
    pub seed: u64,
}

impl TailEstimate {
    pub fn from_counts(hits: u64, replicates: u64, seed: u64) -> Self {
        let p = if replicates == 0 { 0.0 } else { hits as f64 / replicates as f64 };
        let se = if replicates == 0 { 0.0 } else { (p * (1.0 - p) / replicates as f64).sqrt() };
        Self { probability: p, replicates, std_error: se, seed }
    }

    /// Average of per-draw probabilities, with the standard error of the mean.
    pub fn from_average(values: &[f64], seed: u64) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let se = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        } else {
            0.0
        };
        Self {
            probability: mean.clamp(0.0, 1.0),
            replicates: values.len() as u64,
            std_error: se,
            seed,
        }
    }
}

/// Monte Carlo P(R > u) under the AR(1) model for every u in `u_grid`.
pub fn simulate_tail(
    n: usize,
    rho: f64,
    dist: ErrorDistribution,
    u_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    check_length(n)?;
    check_rho(rho)?;
    dist.validate()?;
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    let parts = rng::par_chunks(replicates, seed, |rng, len| {
        let mut x = vec![0.0; n];
        let mut hits = vec![0u64; u_grid.len()];
        for _ in 0..len {
            fill_ar1(&mut x, rho, dist, rng);
            let (num, den) = ratio_parts(&x);
            let r = num / den;
            for (h, &u) in hits.iter_mut().zip(u_grid) {
                *h += u64::from(r > u);
            }
        }
        hits
    });
    let hits = rng::sum_counts(parts, u_grid.len());
    Ok(hits
        .into_iter()
        .map(|h| TailEstimate::from_counts(h, replicates as u64, seed))
        .collect())
}

/// Monte Carlo P(R > u | C) under normal errors: X₂ᵢ given the odd values is
/// N(ρAᵢ/(1+ρ²), 1/(1+ρ²)) independently over i.
pub fn simulate_conditional_tail(
    conditioning: &OddConditioning,
    rho: f64,
    u_grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    check_rho(rho)?;
    if replicates == 0 {
        return Err(Error::invalid("replicates must be at least 1"));
    }
    let c = 1.0 + rho * rho;
    let sd = c.recip().sqrt();
    let means: Vec<f64> = conditioning.a.iter().map(|a| rho * a / c).collect();
    let parts = rng::par_chunks(replicates, seed, |rng, len| {
        let mut even = vec![0.0; means.len()];
        let mut hits = vec![0u64; u_grid.len()];
        for _ in 0..len {
            for (z, mu) in even.iter_mut().zip(&means) {
                let e: f64 = StandardNormal.sample(rng);
                *z = mu + sd * e;
            }
            let r = conditioning.ratio_with_even(&even);
            for (h, &u) in hits.iter_mut().zip(u_grid) {
                *h += u64::from(r > u);
            }
        }
        hits
    });
    Ok(rng::sum_counts(parts, u_grid.len())
        .into_iter()
        .map(|h| TailEstimate::from_counts(h, replicates as u64, seed))
        .collect())
}
