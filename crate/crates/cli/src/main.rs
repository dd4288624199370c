//! `twoam`: simulate, analyse and compare 2AM and ABD register runs.
//!
//! Exit status is 0 when the command succeeded and every verification it
//! performs passed, 1 when a verification failed and 2 for configuration,
//! usage or input errors.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

/// A configuration or input problem. Maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Whether every verification of a command passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Parser)]
#[command(
    name = "twoam",
    version,
    about = "2AM register simulator, trace checker and analytics"
)]
struct Cli {
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Flags {
    /// 2am or abd.
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    clients: Option<usize>,
    /// Per-client arrival rate λ, operations per second.
    #[arg(long)]
    rate: Option<f64>,
    /// Service rate μ for the analytical model.
    #[arg(long)]
    service_rate: Option<f64>,
    /// Uniform one-way message delay over [0, MS) milliseconds.
    #[arg(long, value_name = "MS")]
    async_ms: Option<u32>,
    /// Fixed one-way message delay in milliseconds.
    #[arg(long, value_name = "MS")]
    fixed_ms: Option<f64>,
    /// Time a replica spends on each message, in microseconds.
    #[arg(long, value_name = "US")]
    processing_us: Option<f64>,
    /// Rate of exponential read round trips, per second.
    #[arg(long)]
    delay_rate_read: Option<f64>,
    /// Rate of exponential write round trips, per second.
    #[arg(long)]
    delay_rate_write: Option<f64>,
    /// Operations per client.
    #[arg(long)]
    ops: Option<u64>,
    /// Number of keys; each operation picks one uniformly.
    #[arg(long)]
    keys: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (simulate) or file (everything else; default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature tolerance (theory) or allowed absolute delta (compare).
    #[arg(long)]
    tol: Option<f64>,
    /// Sizes N = n for the theory grid, e.g. `2-15` or `3,5,7`.
    #[arg(long)]
    sizes: Option<String>,
    /// Upper limit of the sums over m (theory; default N - 1).
    #[arg(long)]
    max_m: Option<usize>,
    /// Crash a replica at a time in seconds, as REPLICA@SECS. Repeatable.
    #[arg(long, value_name = "REPLICA@SECS")]
    crash: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol simulation and write trace.csv and report.csv.
    Simulate(Flags),
    /// Evaluate the analytical model over a grid of sizes.
    Theory {
        #[command(flatten)]
        flags: Flags,
        /// Clamp a negative t' to 0 instead of refusing.
        #[arg(long)]
        force: bool,
    },
    /// Run every checker on a trace CSV.
    Check {
        trace: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Compare a theory CSV against simulation reports.
    Compare {
        theory: PathBuf,
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Latency percentiles of trace files, or of a 2AM and an ABD run on the
    /// same configuration when no file is given.
    Latency {
        traces: Vec<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

fn settings(config: Option<&PathBuf>, flags: &Flags) -> Result<Settings, UsageError> {
    let mut s = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            Settings::parse_file(&text)?
        }
        None => Settings::default(),
    };
    s.set("protocol", flags.protocol.as_ref());
    s.set("replicas", flags.replicas);
    s.set("clients", flags.clients);
    s.set("rate", flags.rate);
    s.set("service-rate", flags.service_rate);
    s.set("async-ms", flags.async_ms);
    s.set("fixed-ms", flags.fixed_ms);
    s.set("processing-us", flags.processing_us);
    s.set("delay-rate-read", flags.delay_rate_read);
    s.set("delay-rate-write", flags.delay_rate_write);
    s.set("ops", flags.ops);
    s.set("keys", flags.keys);
    s.set("seed", flags.seed);
    s.set("out", flags.out.as_ref().map(|p| p.display()));
    s.set("tol", flags.tol);
    s.set("sizes", flags.sizes.as_ref());
    s.set("max-m", flags.max_m);
    if !flags.crash.is_empty() {
        s.set("crash", Some(flags.crash.join(",")));
    }
    Ok(s)
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    let config = cli.config.as_ref();
    match &cli.command {
        Command::Simulate(flags) => commands::simulate(&settings(config, flags)?),
        Command::Theory { flags, force } => commands::theory(&settings(config, flags)?, *force),
        Command::Check { trace, flags } => commands::check(&settings(config, flags)?, trace),
        Command::Compare { theory, reports, flags } => commands::compare(&settings(config, flags)?, theory, reports),
        Command::Latency { traces, flags } => commands::latency(&settings(config, flags)?, traces),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
