// SPDX-License-Identifier: MIT OR Apache-2.0

//! Residual bootstraps under a hypothesized coefficient ρ₀: the plain
//! unconditional scheme, the kernel-smoothed (†) scheme and the conditional
//! (#) scheme that keeps the odd-indexed observations fixed.

use crate::ar1::{
    check_rho, compute_residuals, condition_decompose, ratio_parts, Ar1Model, Ar1Series, ErrorDistribution,
    OddConditioning, TailEstimate,
};
use crate::cgf::{ConditionalCgf, MixtureConditionalCgf};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::saddlepoint::{conditional_tail, SaddleResult};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BootstrapScheme {
    Unconditional,
    Smoothed,
    Conditional,
}

impl std::str::FromStr for BootstrapScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unconditional" => Ok(Self::Unconditional),
            "smoothed" => Ok(Self::Smoothed),
            "conditional" => Ok(Self::Conditional),
            other => Err(Error::Parse(format!("unknown bootstrap scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub rho0: f64,
    pub replicates: usize,
    /// Kernel bandwidth; `None` means 1/m.
    pub tau: Option<f64>,
    pub seed: u64,
    pub scheme: BootstrapScheme,
}

impl BootstrapConfig {
    pub fn new(scheme: BootstrapScheme, rho0: f64, replicates: usize, seed: u64) -> Self {
        Self { rho0, replicates, tau: None, seed, scheme }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho0)?;
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::invalid(format!("tau must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn tau_for(&self, m: usize) -> f64 {
        self.tau.unwrap_or(1.0 / m as f64)
    }

    fn expect(&self, scheme: BootstrapScheme) -> Result<()> {
        self.validate()?;
        if self.scheme != scheme {
            return Err(Error::invalid(format!("configuration is for the {:?} scheme", self.scheme)));
        }
        Ok(())
    }
}

/// Fills `x` with an AR(1) path driven by `draw`, using X₁ = ε₁/√(1−ρ₀²).
fn fill_path(x: &mut [f64], rho0: f64, mut draw: impl FnMut() -> f64) {
    x[0] = draw() / (1.0 - rho0 * rho0).sqrt();
    for i in 1..x.len() {
        x[i] = rho0 * x[i - 1] + draw();
    }
}

/// P*(R* > u) for each u, resampling standardized residuals.
pub fn unconditional_bootstrap_tails(series: &Ar1Series, cfg: &BootstrapConfig, u_grid: &[f64]) -> Result<Vec<TailEstimate>> {
    cfg.expect(BootstrapScheme::Unconditional)?;
    let eta = compute_residuals(series, cfg.rho0)?.standardized;
    let n = series.n();
    let parts = rng::par_chunks(cfg.replicates, cfg.seed, |rng, len| {
        let mut x = vec![0.0; n];
        let mut hits = vec![0u64; u_grid.len()];
        for _ in 0..len {
            fill_path(&mut x, cfg.rho0, || eta[rng.random_range(0..eta.len())]);
            let (num, den) = ratio_parts(&x);
            let r = num / den;
            for (h, &u) in hits.iter_mut().zip(u_grid) {
                *h += u64::from(r > u);
            }
        }
        hits
    });
    Ok(rng::sum_counts(parts, u_grid.len())
        .into_iter()
        .map(|h| TailEstimate::from_counts(h, cfg.replicates as u64, cfg.seed))
        .collect())
}

pub fn unconditional_bootstrap_tail(series: &Ar1Series, cfg: &BootstrapConfig, u: f64) -> Result<TailEstimate> {
    unconditional_bootstrap_tails(series, cfg, &[u]).map(|mut v| v.remove(0))
}

/// Per-index samplers for the even-indexed values of a mixture conditional law.
pub struct MixtureSampler<'a> {
    mix: &'a MixtureConditionalCgf,
    pickers: Vec<Picker>,
    sd: f64,
}

enum Picker {
    Alias(WeightedAliasIndex<f64>),
    Cumulative(WeightedIndex<f64>),
}

/// Draw counts above which alias tables pay for their construction.
pub const ALIAS_THRESHOLD: usize = 1000;

impl<'a> MixtureSampler<'a> {
    pub fn new(mix: &'a MixtureConditionalCgf, draws: usize) -> Result<Self> {
        let m = mix.conditioning().m;
        let mut pickers = Vec::with_capacity(m);
        for i in 0..m {
            let w: Vec<f64> = mix.components(i).iter().map(|p| p.log_weight.exp()).collect();
            let bad = |e: rand::distr::weighted::Error| Error::degenerate(format!("mixture weights of term {i}: {e}"));
            pickers.push(if draws > ALIAS_THRESHOLD {
                Picker::Alias(WeightedAliasIndex::new(w).map_err(bad)?)
            } else {
                Picker::Cumulative(WeightedIndex::new(w).map_err(bad)?)
            });
        }
        Ok(Self { mix, pickers, sd: mix.component_variance().sqrt() })
    }

    /// One draw of X₂ᵢ (0-based i).
    #[inline]
    pub fn sample(&self, i: usize, rng: &mut Rng) -> f64 {
        let k = match &self.pickers[i] {
            Picker::Alias(a) => a.sample(rng),
            Picker::Cumulative(c) => c.sample(rng),
        };
        let z: f64 = StandardNormal.sample(rng);
        self.mix.components(i)[k].mean + self.sd * z
    }

    pub fn fill(&self, even: &mut [f64], rng: &mut Rng) {
        for (i, e) in even.iter_mut().enumerate() {
            *e = self.sample(i, rng);
        }
    }
}

/// MC tail of R given the odd values in `mix`, redrawing the even values.
fn mixture_mc_hits(mix: &MixtureConditionalCgf, u_grid: &[f64], replicates: usize, seed: u64) -> Result<Vec<u64>> {
    let sampler = MixtureSampler::new(mix, replicates)?;
    let c = mix.conditioning();
    let parts = rng::par_chunks(replicates, seed, |rng, len| {
        let mut even = vec![0.0; c.m];
        let mut hits = vec![0u64; u_grid.len()];
        for _ in 0..len {
            sampler.fill(&mut even, rng);
            let r = c.ratio_with_even(&even);
            for (h, &u) in hits.iter_mut().zip(u_grid) {
                *h += u64::from(r > u);
            }
        }
        hits
    });
    Ok(rng::sum_counts(parts, u_grid.len()))
}

fn mixture_sp(mix: &MixtureConditionalCgf, u_grid: &[f64]) -> Result<Vec<SaddleResult>> {
    u_grid.iter().map(|&u| conditional_tail(mix, u)).collect()
}

/// Smoothed-bootstrap tails, both estimators, averaged over conditioning draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedTails {
    pub u: Vec<f64>,
    /// MC inner estimate averaged over conditioning draws.
    pub mc: Vec<TailEstimate>,
    /// Saddlepoint averaged over the same conditioning draws.
    pub sp: Vec<TailEstimate>,
    pub sp_failures: Vec<u64>,
    /// Standard error of the mean paired difference MC − SP over the
    /// conditioning draws where both ran; empty unless both estimators ran.
    pub difference_se: Vec<f64>,
}

/// Which estimators to run inside each smoothed conditioning draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmoothedEstimator {
    MonteCarlo,
    Saddlepoint,
    Both,
}

/// P†(R† > u) = E†[P†(R† > u | C†)] over `n_cond` smoothed series.
pub fn smoothed_bootstrap_tails(
    series: &Ar1Series,
    cfg: &BootstrapConfig,
    u_grid: &[f64],
    n_cond: usize,
    estimator: SmoothedEstimator,
) -> Result<SmoothedTails> {
    cfg.expect(BootstrapScheme::Smoothed)?;
    if n_cond == 0 {
        return Err(Error::invalid("n_cond must be at least 1"));
    }
    let eta = compute_residuals(series, cfg.rho0)?.standardized;
    let n = series.n();
    let tau = cfg.tau_for(series.m());
    let outer_seed = rng::derive_seed(cfg.seed, "smoothed-outer");
    let inner_seed = rng::derive_seed(cfg.seed, "smoothed-inner");
    let want_mc = estimator != SmoothedEstimator::Saddlepoint;
    let want_sp = estimator != SmoothedEstimator::MonteCarlo;
    let draws: Vec<Result<(Vec<f64>, Vec<Option<f64>>)>> = (0..n_cond)
        .map(|j| {
            let mut rng = rng::stream(outer_seed, j as u64);
            let mut x = vec![0.0; n];
            fill_path(&mut x, cfg.rho0, || {
                let z: f64 = StandardNormal.sample(&mut rng);
                eta[rng.random_range(0..eta.len())] + tau * z
            });
            let odd: Vec<f64> = x.iter().step_by(2).copied().collect();
            let mix = MixtureConditionalCgf::new(OddConditioning::from_odd(odd)?, &eta, cfg.rho0, tau)?;
            let mc = if want_mc {
                let seed = rng::derive_seed(inner_seed, &j.to_string());
                let hits = mixture_mc_hits(&mix, u_grid, cfg.replicates, seed)?;
                hits.iter().map(|&h| h as f64 / cfg.replicates as f64).collect()
            } else {
                Vec::new()
            };
            let sp = if want_sp {
                u_grid.iter().map(|&u| conditional_tail(&mix, u).ok().map(|r| r.tail)).collect()
            } else {
                Vec::new()
            };
            Ok((mc, sp))
        })
        .collect();
    let draws: Vec<(Vec<f64>, Vec<Option<f64>>)> = draws.into_iter().collect::<Result<_>>()?;
    let mut out = SmoothedTails {
        u: u_grid.to_vec(),
        mc: Vec::new(),
        sp: Vec::new(),
        sp_failures: Vec::new(),
        difference_se: Vec::new(),
    };
    for j in 0..u_grid.len() {
        if want_mc {
            let vals: Vec<f64> = draws.iter().map(|d| d.0[j]).collect();
            let mut est = TailEstimate::from_average(&vals, cfg.seed);
            est.replicates = (n_cond * cfg.replicates) as u64;
            out.mc.push(est);
        }
        if want_sp {
            let vals: Vec<f64> = draws.iter().filter_map(|d| d.1[j]).collect();
            out.sp_failures.push((n_cond - vals.len()) as u64);
            out.sp.push(TailEstimate::from_average(&vals, cfg.seed));
        }
        if want_mc && want_sp {
            let diffs: Vec<f64> = draws.iter().filter_map(|d| d.1[j].map(|p| d.0[j] - p)).collect();
            out.difference_se.push(TailEstimate::from_average(&diffs, cfg.seed).std_error);
        }
    }
    Ok(out)
}

pub fn smoothed_bootstrap_tail(series: &Ar1Series, cfg: &BootstrapConfig, u: f64, n_cond: usize) -> Result<TailEstimate> {
    let t = smoothed_bootstrap_tails(series, cfg, &[u], n_cond, SmoothedEstimator::MonteCarlo)?;
    Ok(t.mc[0])
}

/// The conditional (#) bootstrap law of the even values given the odd values.
pub fn conditional_bootstrap_mixture(series: &Ar1Series, rho0: f64, tau: f64) -> Result<MixtureConditionalCgf> {
    let eps = compute_residuals(series, rho0)?.raw;
    MixtureConditionalCgf::new(condition_decompose(series), &eps, rho0, tau)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBootstrapTail {
    pub mc: TailEstimate,
    pub sp: SaddleResult,
}

pub fn conditional_bootstrap_tails(
    series: &Ar1Series,
    cfg: &BootstrapConfig,
    u_grid: &[f64],
) -> Result<Vec<ConditionalBootstrapTail>> {
    cfg.expect(BootstrapScheme::Conditional)?;
    let mix = conditional_bootstrap_mixture(series, cfg.rho0, cfg.tau_for(series.m()))?;
    let hits = mixture_mc_hits(&mix, u_grid, cfg.replicates, cfg.seed)?;
    let sp = mixture_sp(&mix, u_grid)?;
    Ok(hits
        .into_iter()
        .zip(sp)
        .map(|(h, sp)| ConditionalBootstrapTail { mc: TailEstimate::from_counts(h, cfg.replicates as u64, cfg.seed), sp })
        .collect())
}

pub fn conditional_bootstrap_tail(series: &Ar1Series, cfg: &BootstrapConfig, u: f64) -> Result<ConditionalBootstrapTail> {
    conditional_bootstrap_tails(series, cfg, &[u]).map(|mut v| v.remove(0))
}

/// Budgets and grid for [`relative_error_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// `Unconditional` compares P*(R* > u) with simulated P(R > u);
    /// `Conditional` compares the # saddlepoint with the exact Gaussian
    /// conditional law and needs normal errors.
    pub scheme: BootstrapScheme,
    pub rho0: f64,
    pub dist: ErrorDistribution,
    pub m_values: Vec<usize>,
    pub offsets: Vec<f64>,
    /// Original samples per m.
    pub samples: usize,
    /// Bootstrap replicates per original sample.
    pub replicates: usize,
    /// Replicates for the reference P(R > u).
    pub truth_replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub m: usize,
    pub offset: f64,
    /// Mean reference probability over samples.
    pub truth: f64,
    /// Mean over original samples of |P* − P|/P.
    pub relative_error: f64,
    pub relative_error_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Fitted exponent of (u − ρ₀) in log relative error ~ a + b·log(u−ρ₀) + c·log m.
    pub slope: f64,
    pub slope_se: f64,
    /// 95% interval for the slope.
    pub slope_ci: (f64, f64),
    pub m_coefficient: f64,
}

/// Empirical relative error of a bootstrap tail against its target, with a
/// log-log fit in (u − ρ₀).
pub fn relative_error_probe(cfg: &ProbeConfig) -> Result<ProbeReport> {
    check_rho(cfg.rho0)?;
    if cfg.samples == 0 || cfg.replicates == 0 || cfg.truth_replicates == 0 || cfg.offsets.is_empty() {
        return Err(Error::invalid("probe budgets and offsets must be non-empty"));
    }
    if cfg.offsets.iter().any(|&o| !(o > 0.0)) {
        return Err(Error::invalid("probe offsets must be positive"));
    }
    let conditional = match cfg.scheme {
        BootstrapScheme::Unconditional => false,
        BootstrapScheme::Conditional if cfg.dist == ErrorDistribution::Normal => true,
        BootstrapScheme::Conditional => {
            return Err(Error::invalid("the conditional probe needs normal errors for its exact reference"))
        }
        BootstrapScheme::Smoothed => return Err(Error::invalid("no relative-error probe for the smoothed scheme")),
    };
    let u_grid: Vec<f64> = cfg.offsets.iter().map(|o| cfg.rho0 + o).collect();
    let mut rows = Vec::new();
    for &m in &cfg.m_values {
        let n = 2 * m + 1;
        let model = Ar1Model::new(n, cfg.rho0, cfg.dist)?;
        let tag = format!("probe-m{m}");
        let truth = if conditional {
            Vec::new()
        } else {
            crate::ar1::simulate_tail(
                n,
                cfg.rho0,
                cfg.dist,
                &u_grid,
                cfg.truth_replicates,
                rng::derive_seed(cfg.seed, &format!("{tag}-truth")),
            )?
            .iter()
            .map(|t| t.probability)
            .collect()
        };
        let sample_seed = rng::derive_seed(cfg.seed, &format!("{tag}-samples"));
        let boot_seed = rng::derive_seed(cfg.seed, &format!("{tag}-boot"));
        let mut errs = vec![Vec::with_capacity(cfg.samples); u_grid.len()];
        let mut refs = vec![Vec::with_capacity(cfg.samples); u_grid.len()];
        for s in 0..cfg.samples {
            let series = model.draw(&mut rng::stream(sample_seed, s as u64));
            let (boot, reference) = if conditional {
                let mix = conditional_bootstrap_mixture(&series, cfg.rho0, 1.0 / m as f64)?;
                let exact = crate::cgf::GaussianConditionalCgf::new(condition_decompose(&series), cfg.rho0)?;
                let mut b = Vec::with_capacity(u_grid.len());
                let mut r = Vec::with_capacity(u_grid.len());
                for &u in &u_grid {
                    b.push(conditional_tail(&mix, u)?.tail);
                    r.push(conditional_tail(&exact, u)?.tail);
                }
                (b, r)
            } else {
                let bc = BootstrapConfig::new(
                    BootstrapScheme::Unconditional,
                    cfg.rho0,
                    cfg.replicates,
                    rng::derive_seed(boot_seed, &s.to_string()),
                );
                let b = unconditional_bootstrap_tails(&series, &bc, &u_grid)?.iter().map(|t| t.probability).collect();
                (b, truth.clone())
            };
            for k in 0..u_grid.len() {
                // Conditionings with a zero exact tail carry no relative error.
                if reference[k] > 0.0 {
                    errs[k].push((boot[k] - reference[k]).abs() / reference[k]);
                    refs[k].push(reference[k]);
                }
            }
        }
        for k in 0..u_grid.len() {
            let e = &errs[k];
            if e.is_empty() {
                continue;
            }
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            rows.push(ProbeRow {
                m,
                offset: cfg.offsets[k],
                truth: refs[k].iter().sum::<f64>() / refs[k].len() as f64,
                relative_error: mean,
                relative_error_se: TailEstimate::from_average(e, cfg.seed).std_error,
            });
        }
    }
    let fit: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.relative_error > 0.0)
        .map(|r| (r.relative_error.ln(), r.offset.ln(), (r.m as f64).ln()))
        .collect();
    let (coef, se) = ols3(&fit)?;
    Ok(ProbeReport {
        rows,
        slope: coef[1],
        slope_se: se[1],
        slope_ci: (coef[1] - 1.96 * se[1], coef[1] + 1.96 * se[1]),
        m_coefficient: coef[2],
    })
}

/// OLS of y on (1, x1, x2), or on (1, x1) when x2 is constant.
fn ols3(data: &[(f64, f64, f64)]) -> Result<([f64; 3], [f64; 3])> {
    let x2_varies = data.iter().any(|d| (d.2 - data[0].2).abs() > 1e-12);
    let p = if x2_varies { 3 } else { 2 };
    if data.len() <= p {
        return Err(Error::degenerate("too few points for the relative-error fit"));
    }
    let row = |d: &(f64, f64, f64)| [1.0, d.1, d.2];
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for d in data {
        let r = row(d);
        for a in 0..p {
            xty[a] += r[a] * d.0;
            for b in 0..p {
                xtx[a][b] += r[a] * r[b];
            }
        }
    }
    let inv = invert(&xtx, p).ok_or_else(|| Error::degenerate("singular relative-error design"))?;
    let mut coef = [0.0; 3];
    for a in 0..p {
        coef[a] = (0..p).map(|b| inv[a][b] * xty[b]).sum();
    }
    let rss: f64 = data
        .iter()
        .map(|d| {
            let r = row(d);
            let fit: f64 = (0..p).map(|a| coef[a] * r[a]).sum();
            (d.0 - fit).powi(2)
        })
        .sum();
    let sigma2 = rss / (data.len() - p) as f64;
    let mut se = [0.0; 3];
    for a in 0..p {
        se[a] = (sigma2 * inv[a][a]).sqrt();
    }
    Ok((coef, se))
}

fn invert(m: &[[f64; 3]; 3], p: usize) -> Option<[[f64; 3]; 3]> {
    let mut a = *m;
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate().take(p) {
        row[i] = 1.0;
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        inv.swap(c, piv);
        let d = a[c][c];
        for k in 0..p {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for r in 0..p {
            if r != c {
                let f = a[r][c];
                for k in 0..p {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::simulate_ar1;
    use crate::numerics::normal_cdf;

    /// Kolmogorov-Smirnov statistic of `xs` against `cdf`.
    fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Asymptotic 1% critical value of the one-sample KS statistic.
    fn ks_critical(n: usize) -> f64 {
        1.628 / (n as f64).sqrt()
    }

    fn t10_series(seed: u64) -> Ar1Series {
        simulate_ar1(39, 0.5, ErrorDistribution::StudentT { dof: 10 }, seed).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = BootstrapConfig::new(BootstrapScheme::Unconditional, 0.5, 10, 1);
        assert!(c.validate().is_ok());
        c.replicates = 0;
        assert!(c.validate().is_err());
        let c = BootstrapConfig::new(BootstrapScheme::Smoothed, 0.5, 10, 1).with_tau(0.0);
        assert!(c.validate().is_err());
        let c = BootstrapConfig::new(BootstrapScheme::Smoothed, 0.5, 10, 1);
        assert!(unconditional_bootstrap_tail(&t10_series(1), &c, 0.5).is_err());
        assert_eq!(c.tau_for(19), 1.0 / 19.0);
    }

    #[test]
    fn unconditional_sanity_bound() {
        let c = BootstrapConfig::new(BootstrapScheme::Unconditional, 0.5, 2000, 3);
        let t = unconditional_bootstrap_tail(&t10_series(2), &c, -1.1).unwrap();
        assert_eq!(t.probability, 1.0);
    }

    #[test]
    fn resampled_residual_moments() {
        let eta = compute_residuals(&t10_series(4), 0.5).unwrap().standardized;
        let mut rng = rng::stream(4, 9);
        let draws = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let e = eta[rng.random_range(0..eta.len())];
            s1 += e;
            s2 += e * e;
        }
        let mean = s1 / draws as f64;
        let var = s2 / draws as f64 - mean * mean;
        assert!(mean.abs() < 4e-3, "{mean}");
        assert!((var - 1.0).abs() < 1e-2, "{var}");
    }

    #[test]
    fn smoothed_density_sampling_matches_kernel_mixture() {
        let eta = compute_residuals(&t10_series(5), 0.5).unwrap().standardized;
        let tau = 1.0 / 19.0;
        let mut rng = rng::stream(5, 1);
        let draws = 100_000;
        let xs: Vec<f64> = (0..draws)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                eta[rng.random_range(0..eta.len())] + tau * z
            })
            .collect();
        let cdf = |x: f64| eta.iter().map(|e| normal_cdf((x - e) / tau)).sum::<f64>() / eta.len() as f64;
        assert!(ks(xs, cdf) < ks_critical(draws));
        // The kernel density integrates to one.
        assert!((cdf(50.0) - 1.0).abs() < 1e-15 && cdf(-50.0) < 1e-15);
    }

    #[test]
    fn conditional_sampler_matches_mixture_cdf() {
        let s = t10_series(6);
        let mix = conditional_bootstrap_mixture(&s, 0.5, 1.0 / 19.0).unwrap();
        for i in 0..mix.conditioning().m {
            let total: f64 = mix.components(i).iter().map(|p| p.log_weight.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let draws = 100_000;
        let sampler = MixtureSampler::new(&mix, draws).unwrap();
        let small = MixtureSampler::new(&mix, 10).unwrap();
        let mut rng = rng::stream(6, 0);
        for &i in &[0usize, 7, 18] {
            let xs: Vec<f64> = (0..draws).map(|_| sampler.sample(i, &mut rng)).collect();
            assert!(ks(xs, |z| mix.cdf(i, z)) < ks_critical(draws), "alias, term {i}");
            let xs: Vec<f64> = (0..20_000).map(|_| small.sample(i, &mut rng)).collect();
            assert!(ks(xs, |z| mix.cdf(i, z)) < ks_critical(20_000), "cumulative, term {i}");
        }
    }

    #[test]
    fn rho_zero_marginal_over_k_is_uniform() {
        let s = t10_series(7);
        let mix = conditional_bootstrap_mixture(&s, 0.0, 0.2).unwrap();
        let mm = compute_residuals(&s, 0.0).unwrap().raw.len();
        for i in 0..3 {
            let mut by_k = vec![0.0; mm];
            for p in mix.components(i) {
                by_k[p.k as usize] += p.log_weight.exp();
            }
            for v in by_k {
                assert!((v - 1.0 / mm as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let s = t10_series(8);
        let c = BootstrapConfig::new(BootstrapScheme::Unconditional, 0.5, 20_000, 8);
        let grid = [0.55, 0.6, 0.65];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| unconditional_bootstrap_tails(&s, &c, &grid).unwrap())
        };
        assert_eq!(run(1), run(3));
        let cc = BootstrapConfig::new(BootstrapScheme::Conditional, 0.5, 20_000, 8);
        let runc = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| conditional_bootstrap_tails(&s, &cc, &grid).unwrap())
        };
        assert_eq!(runc(1), runc(4));
    }

    #[test]
    fn conditional_sp_agrees_with_mc() {
        let s = simulate_ar1(39, 0.5, ErrorDistribution::CenteredExponential, 10).unwrap();
        let c = BootstrapConfig::new(BootstrapScheme::Conditional, 0.5, 200_000, 10);
        let grid = [0.55, 0.6, 0.65, 0.7, 0.75];
        for r in conditional_bootstrap_tails(&s, &c, &grid).unwrap() {
            if r.sp.tail >= 0.005 {
                let tol = 3.0 * r.mc.std_error + 0.02 * r.sp.tail;
                assert!((r.sp.tail - r.mc.probability).abs() <= tol, "{r:?}");
            }
        }
    }

    #[test]
    fn smoothed_sp_agrees_with_mc() {
        let s = t10_series(11);
        let c = BootstrapConfig::new(BootstrapScheme::Smoothed, 0.5, 5000, 11);
        let grid = [0.55, 0.6, 0.65];
        let t = smoothed_bootstrap_tails(&s, &c, &grid, 20, SmoothedEstimator::Both).unwrap();
        for k in 0..grid.len() {
            let (mc, sp) = (t.mc[k], t.sp[k]);
            assert!(t.difference_se[k] < mc.std_error);
            let tol = 3.0 * t.difference_se[k] + 0.02 * sp.probability;
            assert!((mc.probability - sp.probability).abs() <= tol, "{k}: {mc:?} {sp:?}");
        }
    }

    #[test]
    fn probe_rejects_unsupported_setups() {
        let mut c = ProbeConfig {
            scheme: BootstrapScheme::Conditional,
            rho0: 0.5,
            dist: ErrorDistribution::CenteredExponential,
            m_values: vec![4],
            offsets: vec![0.05, 0.1, 0.15, 0.2],
            samples: 2,
            replicates: 100,
            truth_replicates: 100,
            seed: 1,
        };
        assert!(relative_error_probe(&c).is_err());
        c.dist = ErrorDistribution::Normal;
        c.offsets[0] = 0.0;
        assert!(relative_error_probe(&c).is_err());
    }

    #[test]
    fn ols_recovers_exact_fit() {
        let data: Vec<(f64, f64, f64)> = [(0.1, 2.0), (0.2, 2.0), (0.3, 3.0), (0.4, 3.0), (0.5, 4.0)]
            .iter()
            .map(|&(x, z): &(f64, f64)| (1.0 + 4.0 * x.ln() - 0.5 * z.ln(), x.ln(), z.ln()))
            .collect();
        let (c, se) = ols3(&data).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-10 && (c[1] - 4.0).abs() < 1e-10 && (c[2] + 0.5).abs() < 1e-10);
        assert!(se[1] < 1e-6);
    }
}
