//! The `cokflag` command line: reproducible simulations, comparisons against
//! theory, exact tables and the brute-force oracle.
//!
//! Exit codes: 0 success, 1 configuration error, 2 degenerate distribution,
//! 3 bounds exceeded, 4 statistical or oracle failure.

pub mod config;
pub mod experiment;
pub mod tables;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use thiserror::Error;

use crate::group::GroupError;
use crate::hall_littlewood::HlError;
use crate::oracle::{run_suites, OracleConfig};
use crate::sampler::SamplerError;
use crate::stats::StatsError;
use crate::theory::TheoryError;
pub use config::{ExperimentArgs, ExperimentConfig, Mode};
pub use experiment::{compare, simulate, SCHEMA_VERSION};
pub use tables::{hl_table, theory_table, Format, HlArgs, TheoryArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_BOUNDS: i32 = 3;
pub const EXIT_FAIL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate distribution: {0}")]
    Degenerate(String),
    #[error("bounds exceeded: {0}")]
    Bounds(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Bounds(_) => EXIT_BOUNDS,
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::BoundExceeded { .. } => CliError::Bounds(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<TheoryError> for CliError {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Group(g) => g.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Theory(t) => t.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Degenerate { .. } => CliError::Degenerate(e.to_string()),
            SamplerError::Group(g) => g.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<HlError> for CliError {
    fn from(e: HlError) -> Self {
        match e {
            HlError::Group(g) => g.into(),
            HlError::TooManyVariables { .. } | HlError::ProductTooLarge { .. } | HlError::NoConvergence { .. } => {
                CliError::Bounds(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cokflag", version, about = "Cokernel flags of random matrix products")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample flags and report their histogram.
    Simulate(ExperimentArgs),
    /// Sample and compare against the predicted law.
    Compare(ExperimentArgs),
    /// Print exact tables of the limiting laws.
    Theory(TheoryArgs),
    /// Print Hall-Littlewood structure constants.
    Hl(HlArgs),
    /// Run the brute-force identity checks.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    /// Largest group order checked.
    #[arg(long, default_value_t = 64)]
    pub max_order: u64,
    /// Corrupt one check on purpose to see a failure report.
    #[arg(long)]
    pub inject_fault: bool,
}

fn write_report(cfg: &ExperimentConfig, report: Value, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    match &cfg.output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string())),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve(cli.threads)?;
            let report = simulate(&cfg)?;
            write_report(&cfg, report, out)?;
            Ok(EXIT_OK)
        }
        Command::Compare(args) => {
            let cfg = args.resolve(cli.threads)?;
            let (report, pass) = compare(&cfg)?;
            write_report(&cfg, report, out)?;
            Ok(if pass { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Theory(args) => {
            let table = theory_table(args)?;
            tables::write_table(out, &table, args.format)?;
            Ok(EXIT_OK)
        }
        Command::Hl(args) => {
            let table = hl_table(args)?;
            tables::write_table(out, &table, args.format)?;
            Ok(EXIT_OK)
        }
        Command::Oracle(args) => {
            let cfg = OracleConfig {
                inject_fault: args.inject_fault,
                ..OracleConfig::limited(args.max_order)
            };
            let io = |e: std::io::Error| CliError::Io(e.to_string());
            let mut all = true;
            for s in run_suites(&cfg) {
                let pass = s.passed();
                all &= pass;
                let status = if pass { "PASS" } else { "FAIL" };
                writeln!(
                    out,
                    "{status} {} ({} checks, {} failures)",
                    s.name, s.checked, s.failures
                )
                .map_err(io)?;
                for d in &s.dumps {
                    writeln!(out, "    {d}").map_err(io)?;
                }
            }
            Ok(if all { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Reports go to `out`, diagnostics and the elapsed time to
/// `err`, so that a report depends only on its configuration.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let started = Instant::now();
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli, &mut buf)),
            Err(e) => Err(CliError::Config(format!("thread pool: {e}"))),
        },
        None => execute(&cli, &mut buf),
    };
    let result = result.and_then(|code| {
        out.write_all(&buf).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(code)
    });
    if matches!(cli.command, Command::Simulate(_) | Command::Compare(_)) {
        let _ = writeln!(err, "elapsed {:.3}s", started.elapsed().as_secs_f64());
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
