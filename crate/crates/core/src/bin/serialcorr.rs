// SPDX-License-Identifier: MIT OR Apache-2.0

use clap::{Args, Parser, Subcommand};
use serialcorr::experiments::{self, Command, OutputFormat, RunConfig};
use serialcorr::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "serialcorr", version, about = "Saddlepoint and bootstrap tail areas for the AR(1) serial correlation coefficient")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Gaussian saddlepoints against simulation (unconditional and conditional)
    Table1,
    /// Unconditional against smoothed conditional bootstrap on one sample
    Table2,
    /// Simulated tails against bootstrap means and sds over many samples
    Table3,
    /// Conditional bootstrap saddlepoint against Monte Carlo
    Table4,
    /// Power of the unconditional and conditional tests
    Power,
    /// One tail probability with all intermediate quantities
    Tail,
    /// Simulate an AR(1) series
    Simulate,
    /// Relative error of the bootstrap against the true tail
    ProbeRelerr,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Table1 => Command::Table1,
            Cmd::Table2 => Command::Table2,
            Cmd::Table3 => Command::Table3,
            Cmd::Table4 => Command::Table4,
            Cmd::Power => Command::Power,
            Cmd::Tail => Command::Tail,
            Cmd::Simulate => Command::Simulate,
            Cmd::ProbeRelerr => Command::ProbeRelerr,
        }
    }
}

#[derive(Args)]
struct Flags {
    /// key=value file; flags given here override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho0: Option<String>,
    /// Comma-separated alternatives
    #[arg(long, global = true)]
    rho1: Option<String>,
    /// normal, t10 (any t with at least 9 dof) or exp
    #[arg(long, global = true)]
    dist: Option<String>,
    /// Comma-separated thresholds; overrides --offsets
    #[arg(long, global = true, allow_hyphen_values = true)]
    u: Option<String>,
    /// Comma-separated offsets from rho0
    #[arg(long, global = true)]
    offsets: Option<String>,
    #[arg(long, global = true)]
    level: Option<String>,
    /// Monte Carlo replicates
    #[arg(long, global = true)]
    sims: Option<String>,
    /// Bootstrap replicates
    #[arg(long, global = true)]
    boot: Option<String>,
    /// Inner replicates per smoothed conditioning draw
    #[arg(long, global = true)]
    inner: Option<String>,
    /// Conditioning draws
    #[arg(long, global = true)]
    ncond: Option<String>,
    /// Original samples
    #[arg(long, global = true)]
    samples: Option<String>,
    /// Kernel bandwidth (default 1/m)
    #[arg(long, global = true)]
    tau: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Tail method: gaussian-unconditional, conditional, general, bootstrap
    #[arg(long, global = true)]
    method: Option<String>,
    /// Bootstrap scheme for probe-relerr: unconditional or conditional
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Series file, one observation per line
    #[arg(long, global = true)]
    series: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut add = |k: &'static str, x: &Option<String>| {
            if let Some(s) = x {
                v.push((k, s.clone()));
            }
        };
        add("n", &self.n);
        add("rho0", &self.rho0);
        add("rho1", &self.rho1);
        add("dist", &self.dist);
        add("u", &self.u);
        add("offsets", &self.offsets);
        add("level", &self.level);
        add("sims", &self.sims);
        add("boot", &self.boot);
        add("inner", &self.inner);
        add("ncond", &self.ncond);
        add("samples", &self.samples);
        add("tau", &self.tau);
        add("seed", &self.seed);
        add("threads", &self.threads);
        add("method", &self.method);
        add("scheme", &self.scheme);
        add("format", &self.format);
        for (k, p) in [("series", &self.series), ("out", &self.out)] {
            if let Some(p) = p {
                v.push((k, p.display().to_string()));
            }
        }
        v
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn build_config(cli: &Cli) -> serialcorr::Result<RunConfig> {
    let command: Command = cli.command.into();
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &cli.flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_key_values(&text)?;
        cfg.command = command;
    }
    let mut flags = RunConfig::new(command);
    for (k, v) in cli.flags.pairs() {
        flags.set(k, &v)?;
    }
    cfg.merge(&flags);
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cfg: &RunConfig) -> serialcorr::Result<Vec<String>> {
    let output = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(|| experiments::run(cfg))?,
        None => experiments::run(cfg)?,
    };
    let text = output.render(cfg.format.unwrap_or(OutputFormat::Csv))?;
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    if let experiments::Output::Table(t) = &output {
        for w in &t.provenance.warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(output.failures())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("failed cell: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
