// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::ar1::ErrorDistribution;
use crate::bootstrap::BootstrapScheme;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Table1,
    Table2,
    Table3,
    Table4,
    Power,
    Tail,
    Simulate,
    ProbeRelerr,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Table1,
        Command::Table2,
        Command::Table3,
        Command::Table4,
        Command::Power,
        Command::Tail,
        Command::Simulate,
        Command::ProbeRelerr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::Table3 => "table3",
            Command::Table4 => "table4",
            Command::Power => "power",
            Command::Tail => "tail",
            Command::Simulate => "simulate",
            Command::ProbeRelerr => "probe-relerr",
        }
    }

    /// Fixed per-command default seed.
    pub fn default_seed(self) -> u64 {
        match self {
            Command::Table1 => 1001,
            Command::Table2 => 1002,
            Command::Table3 => 1003,
            Command::Table4 => 1004,
            Command::Power => 1005,
            Command::Tail => 1006,
            Command::Simulate => 1007,
            Command::ProbeRelerr => 1008,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}' (csv or json)"))),
        }
    }
}

/// Tail computation selected by the `tail` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    /// Exact Gaussian eigenvalue CGF of R.
    GaussianUnconditional,
    /// Gaussian closed-form conditional CGF.
    Conditional,
    /// Quadrature conditional CGF for the configured error law.
    General,
    /// Conditional (#) bootstrap mixture CGF built from the series residuals.
    Bootstrap,
}

impl FromStr for TailMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-unconditional" | "unconditional" => Ok(TailMethod::GaussianUnconditional),
            "conditional" | "gaussian-conditional" => Ok(TailMethod::Conditional),
            "general" => Ok(TailMethod::General),
            "bootstrap" | "mixture" => Ok(TailMethod::Bootstrap),
            _ => Err(Error::Parse(format!(
                "unknown method '{s}' (gaussian-unconditional, conditional, general, bootstrap)"
            ))),
        }
    }
}

/// Settings for one CLI run. Unset fields take per-command defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<usize>,
    pub rho0: Option<f64>,
    pub rho1: Option<Vec<f64>>,
    pub dist: Option<ErrorDistribution>,
    pub u: Option<Vec<f64>>,
    pub offsets: Option<Vec<f64>>,
    pub level: Option<f64>,
    pub sims: Option<usize>,
    pub boot: Option<usize>,
    /// Inner replicates per conditioning draw for the smoothed bootstrap.
    pub inner: Option<usize>,
    pub ncond: Option<usize>,
    pub samples: Option<usize>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub method: Option<TailMethod>,
    /// Bootstrap scheme probed by `probe-relerr`.
    pub scheme: Option<BootstrapScheme>,
    pub series: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

pub const DEFAULT_OFFSETS: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad value '{s}' for {key}"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse(format!("bad value '{value}' for {key}")))
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            n: None,
            rho0: None,
            rho1: None,
            dist: None,
            u: None,
            offsets: None,
            level: None,
            sims: None,
            boot: None,
            inner: None,
            ncond: None,
            samples: None,
            tau: None,
            seed: None,
            threads: None,
            method: None,
            scheme: None,
            series: None,
            out: None,
            format: None,
        }
    }

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "command" => self.command = v.parse()?,
            "n" => self.n = Some(parse_one(key, v)?),
            "rho0" | "rho" => self.rho0 = Some(parse_one(key, v)?),
            "rho1" => self.rho1 = Some(parse_list(key, v)?),
            "dist" => self.dist = Some(v.parse()?),
            "u" => self.u = Some(parse_list(key, v)?),
            "offsets" => self.offsets = Some(parse_list(key, v)?),
            "level" => self.level = Some(parse_one(key, v)?),
            "sims" => self.sims = Some(parse_one(key, v)?),
            "boot" => self.boot = Some(parse_one(key, v)?),
            "inner" => self.inner = Some(parse_one(key, v)?),
            "ncond" => self.ncond = Some(parse_one(key, v)?),
            "samples" => self.samples = Some(parse_one(key, v)?),
            "tau" => self.tau = Some(parse_one(key, v)?),
            "seed" => self.seed = Some(parse_one(key, v)?),
            "threads" => self.threads = Some(parse_one(key, v)?),
            "method" => self.method = Some(v.parse()?),
            "scheme" => self.scheme = Some(v.parse()?),
            "series" => self.series = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = Some(v.parse()?),
            other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_key_values(command: Command, text: &str) -> Result<Self> {
        let mut cfg = Self::new(command);
        cfg.apply_key_values(text)?;
        Ok(cfg)
    }

    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(k, v).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(n, rho0, rho1, dist, u, offsets, level, sims, boot, inner, ncond, samples, tau, seed, threads, method, scheme, series, out, format);
        self.command = other.command;
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sims", self.sims),
            ("boot", self.boot),
            ("inner", self.inner),
            ("ncond", self.ncond),
            ("samples", self.samples),
            ("threads", self.threads),
        ] {
            if v == Some(0) {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if let Some(o) = &self.offsets {
            if o.is_empty() || o.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::invalid("offsets must be positive"));
            }
        }
        if let Some(l) = self.level {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::invalid(format!("level must lie in (0, 1), got {l}")));
            }
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::invalid(format!("tau must be positive, got {t}")));
            }
        }
        for r in self.rho0.iter().chain(self.rho1.iter().flatten()) {
            if !(r.abs() < 1.0) {
                return Err(Error::invalid(format!("|rho| must be below 1, got {r}")));
            }
        }
        if let Some(d) = self.dist {
            d.validate()?;
        }
        Ok(())
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or_else(|| self.command.default_seed())
    }

    pub fn offsets_or_default(&self) -> Vec<f64> {
        self.offsets.clone().unwrap_or_else(|| DEFAULT_OFFSETS.to_vec())
    }

    /// The u grid: explicit `u` if given, else ρ₀ + offsets.
    pub fn u_grid(&self, rho0: f64) -> Vec<f64> {
        match &self.u {
            Some(u) => u.clone(),
            None => self.offsets_or_default().iter().map(|o| rho0 + o).collect(),
        }
    }

    /// Settings that determine the output, rendered as sorted key=value lines.
    pub fn canonical_inputs(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            for k in ["threads", "out", "format"] {
                map.remove(k);
            }
            let mut lines: Vec<String> = map
                .iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            lines.sort();
            return lines.join("\n");
        }
        unreachable!("config is an object")
    }
}
