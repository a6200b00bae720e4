// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reproduction protocols for the published tables, the power study and
//! single-query helpers, all returning serializable results.

pub mod config;
pub mod power;
pub mod table;

pub use config::{Command, OutputFormat, RunConfig, TailMethod, DEFAULT_OFFSETS};
pub use power::{conditional_critical_value_or_edge, gaussian_power, PowerResult};
pub use table::{input_hash, Cell, Provenance, ResultTable, Row, Summary};

use crate::ar1::{
    condition_decompose, simulate_tail, Ar1Model, Ar1Series, ErrorDistribution, TailEstimate,
};
use crate::bootstrap::{
    conditional_bootstrap_mixture, conditional_bootstrap_tails, relative_error_probe, smoothed_bootstrap_tails,
    unconditional_bootstrap_tails, BootstrapConfig, BootstrapScheme, ConditionalBootstrapTail, ProbeConfig,
    SmoothedEstimator, SmoothedTails,
};
use crate::cgf::{GaussianConditionalCgf, GeneralConditionalCgf};
use crate::error::{Error, Result};
use crate::rng;
use crate::saddlepoint::{
    conditional_tail, expected_conditional_tails, gaussian_unconditional_tail, ConditionalBackend,
};
use rand::distr::Distribution;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

const T10: ErrorDistribution = ErrorDistribution::StudentT { dof: 10 };

/// Inner draws per conditioning set for the conditional simulation rows.
pub const CONDITIONAL_SIM_INNER: usize = 10;

/// A simulated series as written by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub n: usize,
    pub rho: f64,
    pub dist: ErrorDistribution,
    pub seed: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Output {
    Table(ResultTable),
    Record(serde_json::Value),
    Series(SeriesRecord),
}

impl Output {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        let json = |v: &serde_json::Value| serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()));
        match (self, format) {
            (Output::Table(t), OutputFormat::Csv) => t.to_csv(),
            (Output::Table(t), OutputFormat::Json) => t.to_json(),
            (Output::Record(v), _) => json(v).map(|s| s + "\n"),
            (Output::Series(s), OutputFormat::Csv) => Ok(s.values.iter().map(|v| format!("{v}\n")).collect()),
            (Output::Series(s), OutputFormat::Json) => json(&serde_json::to_value(s).expect("series serializes")),
        }
    }

    /// Labels of failed cells, empty when everything succeeded.
    pub fn failures(&self) -> Vec<String> {
        match self {
            Output::Table(t) => t.provenance.failures.clone(),
            _ => Vec::new(),
        }
    }
}

/// Reads one observation per line; blank lines and `#` comments are skipped.
pub fn read_series(path: &Path) -> Result<(Ar1Series, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let series = parse_series(text)?;
    Ok((series, bytes))
}

pub fn parse_series(text: &str) -> Result<Ar1Series> {
    let mut x = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        x.push(s.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", i + 1)))?);
    }
    Ar1Series::observed(x)
}

pub fn run(cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    Ok(match cfg.command {
        Command::Table1 => Output::Table(cmd_table1(cfg)?),
        Command::Table2 => Output::Table(cmd_table2(cfg)?),
        Command::Table3 => Output::Table(cmd_table3(cfg)?),
        Command::Table4 => Output::Table(cmd_table4(cfg)?),
        Command::Power => Output::Table(cmd_power(cfg)?),
        Command::Tail => Output::Record(cmd_tail(cfg)?),
        Command::Simulate => Output::Series(cmd_simulate(cfg)?),
        Command::ProbeRelerr => Output::Table(cmd_probe_relerr(cfg)?),
    })
}

fn offset_labels(offsets: &[f64]) -> Vec<String> {
    offsets.iter().map(|o| format!("+{o}")).collect()
}

/// Column labels for a grid that may be explicit u values.
fn grid_labels(cfg: &RunConfig, rho0: f64) -> Vec<String> {
    match &cfg.u {
        Some(u) => u.iter().map(|v| format!("u={v}")).collect(),
        None => offset_labels(&cfg.u_grid(rho0).iter().map(|u| round_offset(u - rho0)).collect::<Vec<_>>()),
    }
}

fn round_offset(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

fn estimates(grid: &[f64], tails: &[TailEstimate]) -> Vec<Cell> {
    grid.iter().zip(tails).map(|(&u, t)| Cell::estimate(u, t.probability, t.std_error)).collect()
}

fn require_dist(cfg: &RunConfig, default: ErrorDistribution) -> ErrorDistribution {
    cfg.dist.unwrap_or(default)
}

/// Warns when a stochastic row is too noisy for four printed decimals.
fn check_precision(table: &mut ResultTable, method: &str, cells: &[Cell], limit: f64) {
    let worst = cells.iter().filter_map(|c| c.se).fold(0.0, f64::max);
    if worst > limit {
        table.warn(format!("{method}: standard error {worst:.2e} exceeds {limit:.0e}; raise the budget"));
    }
}

/// |SP − MC| / (3·SE + 0.02·SP); at most 1 means agreement.
pub fn agreement_ratio(sp: f64, mc: f64, se: f64) -> f64 {
    let tol = 3.0 * se + 0.02 * sp;
    if tol == 0.0 {
        if (sp - mc).abs() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (sp - mc).abs() / tol
    }
}

/// E[P(R > u | C)] by simulation: `outer` conditioning sets, each with
/// [`CONDITIONAL_SIM_INNER`] redraws of the even values.
pub fn expected_conditional_simulation(model: &Ar1Model, u_grid: &[f64], outer: usize, seed: u64) -> Result<Vec<TailEstimate>> {
    if model.dist != ErrorDistribution::Normal {
        return Err(Error::invalid("conditional simulation needs normal errors"));
    }
    if outer == 0 {
        return Err(Error::invalid("outer draws must be at least 1"));
    }
    let rho = model.rho;
    let c = 1.0 + rho * rho;
    let sd = c.recip().sqrt();
    let per_draw: Vec<Vec<f64>> = rng::par_items(outer, seed, |rng, _| {
        let cond = condition_decompose(&model.draw(rng));
        let means: Vec<f64> = cond.a.iter().map(|a| rho * a / c).collect();
        let mut even = vec![0.0; means.len()];
        let mut hits = vec![0u32; u_grid.len()];
        for _ in 0..CONDITIONAL_SIM_INNER {
            for (z, mu) in even.iter_mut().zip(&means) {
                let e: f64 = StandardNormal.sample(rng);
                *z = mu + sd * e;
            }
            let r = cond.ratio_with_even(&even);
            for (h, &u) in hits.iter_mut().zip(u_grid) {
                *h += u32::from(r > u);
            }
        }
        hits.iter().map(|&h| f64::from(h) / CONDITIONAL_SIM_INNER as f64).collect()
    });
    Ok((0..u_grid.len())
        .map(|j| {
            let v: Vec<f64> = per_draw.iter().map(|d| d[j]).collect();
            let mut t = TailEstimate::from_average(&v, seed);
            t.replicates = (outer * CONDITIONAL_SIM_INNER) as u64;
            t
        })
        .collect())
}

/// Table 1: unconditional and conditional saddlepoints against simulation
/// for Gaussian errors.
pub fn cmd_table1(cfg: &RunConfig) -> Result<ResultTable> {
    if require_dist(cfg, ErrorDistribution::Normal) != ErrorDistribution::Normal {
        return Err(Error::invalid("table1 is defined for normal errors"));
    }
    let rho = cfg.rho0.unwrap_or(0.5);
    let ns = cfg.n.map(|n| vec![n]).unwrap_or_else(|| vec![39, 9]);
    let sims = cfg.sims.unwrap_or(1_000_000);
    let ncond = cfg.ncond.unwrap_or(100_000);
    let seed = cfg.seed_or_default();
    let grid = cfg.u_grid(rho);
    let mut t = ResultTable::new(
        format!("Saddlepoint and simulated tail areas, normal errors, rho = {rho}"),
        grid_labels(cfg, rho),
        cfg,
        b"",
    );
    t.assume(format!("simulation replicates {sims}; conditioning draws {ncond}"));
    t.assume(format!(
        "conditional simulation: {} outer draws x {CONDITIONAL_SIM_INNER} inner draws",
        (sims / CONDITIONAL_SIM_INNER).max(1)
    ));
    for n in ns {
        let model = Ar1Model::new(n, rho, ErrorDistribution::Normal)?;
        let sp: Vec<Cell> = grid
            .iter()
            .map(|&u| match gaussian_unconditional_tail(n, rho, u) {
                Ok(r) => Cell::exact(u, r.tail),
                Err(_) => Cell::failed(u),
            })
            .collect();
        t.push(format!("U saddlepoint n={n}"), sp);
        let sim = simulate_tail(n, rho, ErrorDistribution::Normal, &grid, sims, rng::derive_seed(seed, &format!("u-sim-{n}")))?;
        let cells = estimates(&grid, &sim);
        check_precision(&mut t, "U simulation", &cells, 1e-3);
        t.push(format!("U simulation n={n}"), cells);
        let label = format!("C saddlepoint n={n}");
        match expected_conditional_tails(&model, &grid, ConditionalBackend::Gaussian, ncond, rng::derive_seed(seed, &format!("c-sp-{n}"))) {
            Ok(e) => {
                let cells: Vec<Cell> = e.iter().map(|x| Cell::estimate(x.u, x.estimate.probability, x.estimate.std_error)).collect();
                check_precision(&mut t, &label, &cells, 1e-3);
                let failed: u64 = e.iter().map(|x| x.failures).sum();
                if failed > 0 {
                    t.warn(format!("{label}: {failed} conditioning sets excluded after saddlepoint failure"));
                }
                t.push(label, cells);
            }
            Err(err) => {
                t.warn(format!("{label}: {err}"));
                t.push(label, grid.iter().map(|&u| Cell::failed(u)).collect());
            }
        }
        let outer = (sims / CONDITIONAL_SIM_INNER).max(1);
        let csim = expected_conditional_simulation(&model, &grid, outer, rng::derive_seed(seed, &format!("c-sim-{n}")))?;
        let cells = estimates(&grid, &csim);
        check_precision(&mut t, "C simulation", &cells, 1e-3);
        t.push(format!("C simulation n={n}"), cells);
    }
    Ok(t)
}

fn sample_series(n: usize, rho: f64, dist: ErrorDistribution, seed: u64, index: u64) -> Result<Ar1Series> {
    Ok(Ar1Model::new(n, rho, dist)?.draw(&mut rng::stream(rng::derive_seed(seed, "original-sample"), index)))
}

fn series_or_sample(cfg: &RunConfig, n: usize, rho: f64, dist: ErrorDistribution, index: u64) -> Result<(Ar1Series, Vec<u8>, String)> {
    match &cfg.series {
        Some(p) => {
            let (s, bytes) = read_series(p)?;
            Ok((s, bytes, format!("series file {}", p.display())))
        }
        None => Ok((
            sample_series(n, rho, dist, cfg.seed_or_default(), index)?,
            Vec::new(),
            format!("simulated original sample {index} (n={n}, rho={rho}, {dist})"),
        )),
    }
}

/// Runs the smoothed bootstrap on one sample with both estimators.
pub fn smoothed_comparison(series: &Ar1Series, rho0: f64, grid: &[f64], ncond: usize, inner: usize, tau: Option<f64>, seed: u64) -> Result<SmoothedTails> {
    let mut bc = BootstrapConfig::new(BootstrapScheme::Smoothed, rho0, inner, seed);
    bc.tau = tau;
    smoothed_bootstrap_tails(series, &bc, grid, ncond, SmoothedEstimator::Both)
}

/// Table 2: unconditional bootstrap against smoothed conditional bootstrap
/// averages, one sample.
pub fn cmd_table2(cfg: &RunConfig) -> Result<ResultTable> {
    let rho0 = cfg.rho0.unwrap_or(0.5);
    let dist = require_dist(cfg, T10);
    let n = cfg.n.unwrap_or(39);
    let boot = cfg.boot.unwrap_or(100_000);
    let ncond = cfg.ncond.unwrap_or(500);
    let inner = cfg.inner.unwrap_or(10_000);
    let seed = cfg.seed_or_default();
    let (series, bytes, source) = series_or_sample(cfg, n, rho0, dist, 0)?;
    let grid = cfg.u_grid(rho0);
    let mut t = ResultTable::new(
        format!("Unconditional and smoothed conditional bootstrap, one sample, rho0 = {rho0}"),
        grid_labels(cfg, rho0),
        cfg,
        &bytes,
    );
    t.assume(source);
    t.assume(format!("BS {boot} replicates; ECBS {ncond} conditioning sets x {inner}; tau {}", describe_tau(cfg.tau)));
    let bc = BootstrapConfig::new(BootstrapScheme::Unconditional, rho0, boot, rng::derive_seed(seed, "bs"));
    let bs = unconditional_bootstrap_tails(&series, &bc, &grid)?;
    t.push("BS", estimates(&grid, &bs));
    let sm = smoothed_comparison(&series, rho0, &grid, ncond, inner, cfg.tau, rng::derive_seed(seed, "smoothed"))?;
    t.push("ECBS", estimates(&grid, &sm.mc));
    t.push("ECSP", estimates(&grid, &sm.sp));
    let failed: u64 = sm.sp_failures.iter().sum();
    if failed > 0 {
        t.warn(format!("ECSP: {failed} conditioning saddlepoints failed and were excluded"));
    }
    t.push(
        "ECSP vs ECBS agreement",
        (0..grid.len()).map(|j| Cell::exact(grid[j], agreement_ratio(sm.sp[j].probability, sm.mc[j].probability, sm.difference_se[j]))).collect(),
    );
    Ok(t)
}

fn describe_tau(tau: Option<f64>) -> String {
    tau.map(|t| t.to_string()).unwrap_or_else(|| "1/m".into())
}

/// Mean and standard deviation over samples of the unconditional bootstrap
/// tails, as in the Table 3 protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpread {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub samples: usize,
}

pub fn bootstrap_spread(model: &Ar1Model, grid: &[f64], samples: usize, boot: usize, seed: u64) -> Result<BootstrapSpread> {
    if samples < 2 {
        return Err(Error::invalid("need at least two samples for a spread"));
    }
    let sample_seed = rng::derive_seed(seed, "samples");
    let mut per = Vec::with_capacity(samples);
    for s in 0..samples {
        let series = model.draw(&mut rng::stream(sample_seed, s as u64));
        let bc = BootstrapConfig::new(BootstrapScheme::Unconditional, model.rho, boot, rng::derive_seed(seed, &format!("boot-{s}")));
        per.push(unconditional_bootstrap_tails(&series, &bc, grid)?);
    }
    let k = samples as f64;
    let mean: Vec<f64> = (0..grid.len()).map(|j| per.iter().map(|p| p[j].probability).sum::<f64>() / k).collect();
    let sd = (0..grid.len())
        .map(|j| (per.iter().map(|p| (p[j].probability - mean[j]).powi(2)).sum::<f64>() / (k - 1.0)).sqrt())
        .collect();
    Ok(BootstrapSpread { mean, sd, samples })
}

/// Table 3: simulated tails against the mean and spread of unconditional
/// bootstrap tails over many samples.
pub fn cmd_table3(cfg: &RunConfig) -> Result<ResultTable> {
    let rho0 = cfg.rho0.unwrap_or(0.5);
    let n = cfg.n.unwrap_or(39);
    let sims = cfg.sims.unwrap_or(1_000_000);
    let boot = cfg.boot.unwrap_or(100_000);
    let samples = cfg.samples.unwrap_or(40);
    let seed = cfg.seed_or_default();
    let dists = cfg.dist.map(|d| vec![d]).unwrap_or_else(|| vec![T10, ErrorDistribution::CenteredExponential]);
    let grid = cfg.u_grid(rho0);
    let mut t = ResultTable::new(
        format!("Simulated tails and bootstrap means/sds over samples, n = {n}, rho0 = {rho0}"),
        grid_labels(cfg, rho0),
        cfg,
        b"",
    );
    t.assume(format!("SIM {sims} replicates; {samples} samples x {boot} bootstrap replicates"));
    for dist in dists {
        let model = Ar1Model::new(n, rho0, dist)?;
        let sim = simulate_tail(n, rho0, dist, &grid, sims, rng::derive_seed(seed, &format!("sim-{dist}")))?;
        t.push(format!("{dist} SIM"), estimates(&grid, &sim));
        let spread = bootstrap_spread(&model, &grid, samples, boot, rng::derive_seed(seed, &format!("ebs-{dist}")))?;
        let kroot = (samples as f64).sqrt();
        t.push(
            format!("{dist} EBS"),
            (0..grid.len()).map(|j| Cell::estimate(grid[j], spread.mean[j], spread.sd[j] / kroot)).collect(),
        );
        t.push(format!("{dist} SDBS"), (0..grid.len()).map(|j| Cell::exact(grid[j], spread.sd[j])).collect());
        t.push(
            format!("{dist} EBS - SIM"),
            (0..grid.len()).map(|j| Cell::exact(grid[j], spread.mean[j] - sim[j].probability)).collect(),
        );
    }
    Ok(t)
}

/// Table 4: conditional (#) bootstrap, saddlepoint against Monte Carlo,
/// one sample per ρ₀.
pub fn cmd_table4(cfg: &RunConfig) -> Result<ResultTable> {
    let dist = require_dist(cfg, ErrorDistribution::CenteredExponential);
    let n = cfg.n.unwrap_or(39);
    let boot = cfg.boot.unwrap_or(100_000);
    let seed = cfg.seed_or_default();
    let rhos = cfg.rho0.map(|r| vec![r]).unwrap_or_else(|| vec![0.0, 0.5]);
    let offsets = cfg.offsets_or_default();
    if cfg.u.is_some() && rhos.len() > 1 {
        return Err(Error::invalid("an explicit u grid needs a single rho0"));
    }
    let labels = grid_labels(cfg, rhos[0]);
    let mut extra = Vec::new();
    let mut t = ResultTable::new(format!("Conditional bootstrap saddlepoint (CSP) and Monte Carlo (CBS), n = {n}"), labels, cfg, b"");
    for (i, &rho0) in rhos.iter().enumerate() {
        let (series, bytes, source) = series_or_sample(cfg, n, rho0, dist, i as u64)?;
        extra.extend(bytes);
        t.assume(format!("rho0={rho0}: {source}"));
        let grid = cfg.u.clone().unwrap_or_else(|| offsets.iter().map(|o| rho0 + o).collect());
        let mut bc = BootstrapConfig::new(BootstrapScheme::Conditional, rho0, boot, rng::derive_seed(seed, &format!("cbs-{i}")));
        bc.tau = cfg.tau;
        let res: Vec<ConditionalBootstrapTail> = conditional_bootstrap_tails(&series, &bc, &grid)?;
        t.push(format!("CSP rho0={rho0}"), res.iter().map(|r| Cell::exact(r.sp.u, r.sp.tail)).collect());
        t.push(format!("CBS rho0={rho0}"), grid.iter().zip(&res).map(|(&u, r)| Cell::estimate(u, r.mc.probability, r.mc.std_error)).collect());
        t.push(
            format!("agreement rho0={rho0}"),
            grid.iter().zip(&res).map(|(&u, r)| Cell::exact(u, agreement_ratio(r.sp.tail, r.mc.probability, r.mc.std_error))).collect(),
        );
        for r in &res {
            if !r.sp.feasible && r.mc.probability > 3.0 * r.mc.std_error {
                t.warn(format!("rho0={rho0} u={}: infeasible saddlepoint but Monte Carlo tail {}", r.sp.u, r.mc.probability));
            }
        }
    }
    if !extra.is_empty() {
        t.provenance.input_hash = input_hash(cfg, &extra);
    }
    Ok(t)
}

/// Table 5: power of the unconditional and conditional tests, Gaussian errors.
pub fn cmd_power(cfg: &RunConfig) -> Result<ResultTable> {
    if require_dist(cfg, ErrorDistribution::Normal) != ErrorDistribution::Normal {
        return Err(Error::invalid("the power study is implemented for normal errors"));
    }
    let n = cfg.n.unwrap_or(39);
    let level = cfg.level.unwrap_or(0.05);
    let sims = cfg.sims.unwrap_or(10_000);
    let seed = cfg.seed_or_default();
    let rho0s = cfg.rho0.map(|r| vec![r]).unwrap_or_else(|| vec![0.0, 0.4]);
    let steps: Vec<f64> = match (&cfg.rho1, cfg.rho0) {
        (Some(r1), Some(r0)) => r1.iter().map(|r| round_offset(r - r0)).collect(),
        (Some(_), None) => return Err(Error::invalid("rho1 needs an explicit rho0")),
        (None, _) => cfg.offsets.clone().unwrap_or_else(|| vec![0.1, 0.3, 0.5]),
    };
    let columns = steps.iter().map(|s| format!("rho1=rho0+{s}")).collect();
    let mut t = ResultTable::new(format!("Power of the unconditional (U) and conditional (C) tests, n = {n}, level {level}"), columns, cfg, b"");
    t.assume(format!("level {level}, n {n}, {sims} simulated series per cell; cell coordinate is rho1"));
    for rho0 in rho0s {
        let mut rows: [Vec<Cell>; 4] = Default::default();
        for (j, s) in steps.iter().enumerate() {
            let rho1 = rho0 + s;
            let cell_seed = rng::derive_seed(seed, &format!("power-{rho0}-{j}"));
            match gaussian_power(n, rho0, rho1, level, sims, cell_seed) {
                Ok(p) => {
                    rows[0].push(Cell::estimate(rho1, p.unconditional.probability, p.unconditional.std_error));
                    rows[1].push(Cell::estimate(rho1, p.conditional.probability, p.conditional.std_error));
                    rows[2].push(Cell::exact(rho1, p.unconditional_sp));
                    rows[3].push(Cell::estimate(rho1, p.conditional_sp.probability, p.conditional_sp.std_error));
                    if p.failures > 0 {
                        t.warn(format!("rho0={rho0} rho1={rho1}: {} conditioning sets failed", p.failures));
                    }
                }
                Err(e) => {
                    t.warn(format!("rho0={rho0} rho1={rho1}: {e}"));
                    for r in rows.iter_mut() {
                        r.push(Cell::failed(rho1));
                    }
                }
            }
        }
        let [u, c, usp, csp] = rows;
        t.push(format!("U rho0={rho0}"), u);
        t.push(format!("C rho0={rho0}"), c);
        t.push(format!("U saddlepoint rho0={rho0}"), usp);
        t.push(format!("C saddlepoint rho0={rho0}"), csp);
    }
    Ok(t)
}

/// One saddlepoint tail with every intermediate quantity.
pub fn cmd_tail(cfg: &RunConfig) -> Result<serde_json::Value> {
    let method = cfg.method.unwrap_or(TailMethod::GaussianUnconditional);
    let rho0 = cfg.rho0.unwrap_or(0.5);
    let u = match cfg.u.as_deref() {
        Some([u]) => *u,
        Some(_) => return Err(Error::invalid("tail takes exactly one u")),
        None => return Err(Error::invalid("tail needs --u")),
    };
    let seed = cfg.seed_or_default();
    let (result, n, source, bytes) = if method == TailMethod::GaussianUnconditional {
        let n = cfg.n.unwrap_or(39);
        (gaussian_unconditional_tail(n, rho0, u)?, n, "model".to_string(), Vec::new())
    } else {
        let dist = require_dist(cfg, ErrorDistribution::Normal);
        let (series, bytes, source) = series_or_sample(cfg, cfg.n.unwrap_or(39), rho0, dist, 0)?;
        let c = condition_decompose(&series);
        let r = match method {
            TailMethod::Conditional => conditional_tail(&GaussianConditionalCgf::new(c, rho0)?, u)?,
            TailMethod::General => conditional_tail(&GeneralConditionalCgf::new(c, dist, rho0)?, u)?,
            TailMethod::Bootstrap => {
                let tau = cfg.tau.unwrap_or(1.0 / series.m() as f64);
                conditional_tail(&conditional_bootstrap_mixture(&series, rho0, tau)?, u)?
            }
            TailMethod::GaussianUnconditional => unreachable!(),
        };
        (r, series.n(), source, bytes)
    };
    Ok(serde_json::json!({
        "method": method,
        "n": n,
        "rho0": rho0,
        "source": source,
        "u0": result.u0,
        "t_hat": result.t_hat,
        "w": result.w,
        "psi": result.psi,
        "w_plus": result.w_plus,
        "tail": result.tail,
        "feasible": result.feasible,
        "m": result.m,
        "u": result.u,
        "seed": seed,
        "input_hash": input_hash(cfg, &bytes),
    }))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SeriesRecord> {
    let n = cfg.n.unwrap_or(39);
    let rho = cfg.rho0.unwrap_or(0.5);
    let dist = require_dist(cfg, ErrorDistribution::Normal);
    let seed = cfg.seed_or_default();
    let series = crate::ar1::simulate_ar1(n, rho, dist, seed)?;
    Ok(SeriesRecord { n, rho, dist, seed, values: series.values().to_vec() })
}

/// Relative-error probe of the bootstrap tails with a log-log slope fit.
pub fn cmd_probe_relerr(cfg: &RunConfig) -> Result<ResultTable> {
    let scheme = cfg.scheme.unwrap_or(BootstrapScheme::Unconditional);
    let default_dist = if scheme == BootstrapScheme::Conditional { ErrorDistribution::Normal } else { T10 };
    let pc = ProbeConfig {
        scheme,
        rho0: cfg.rho0.unwrap_or(0.5),
        dist: require_dist(cfg, default_dist),
        m_values: cfg.n.map(|n| vec![(n - 1) / 2]).unwrap_or_else(|| vec![19, 49]),
        offsets: cfg.offsets_or_default(),
        samples: cfg.samples.unwrap_or(40),
        replicates: cfg.boot.unwrap_or(10_000),
        truth_replicates: cfg.sims.unwrap_or(1_000_000),
        seed: cfg.seed_or_default(),
    };
    let report = relative_error_probe(&pc)?;
    let mut t = ResultTable::new(
        format!("Bootstrap relative error by offset, {scheme:?} scheme, {}", pc.dist),
        offset_labels(&pc.offsets),
        cfg,
        b"",
    );
    t.assume(format!(
        "{} samples per m; {} bootstrap replicates; reference from {} replicates",
        pc.samples, pc.replicates, pc.truth_replicates
    ));
    for &m in &pc.m_values {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.m == m).collect();
        let cell = |o: f64, f: &dyn Fn(&crate::bootstrap::ProbeRow) -> Cell| {
            rows.iter().find(|r| r.offset == o).map(|r| f(r)).unwrap_or(Cell::failed(pc.rho0 + o))
        };
        t.push(
            format!("relerr m={m}"),
            pc.offsets.iter().map(|&o| cell(o, &|r| Cell::estimate(pc.rho0 + o, r.relative_error, r.relative_error_se))).collect(),
        );
        t.push(
            format!("reference m={m}"),
            pc.offsets.iter().map(|&o| cell(o, &|r| Cell::exact(pc.rho0 + o, r.truth))).collect(),
        );
    }
    t.summary.push(Summary { name: "slope in log(u - rho0)".into(), value: report.slope, se: Some(report.slope_se) });
    t.summary.push(Summary { name: "slope 95% lower".into(), value: report.slope_ci.0, se: None });
    t.summary.push(Summary { name: "slope 95% upper".into(), value: report.slope_ci.1, se: None });
    t.summary.push(Summary { name: "coefficient of log m".into(), value: report.m_coefficient, se: None });
    Ok(t)
}
