//! The `eprsim` command line.
//!
//! ```text
//! eprsim pattern   [--config FILE] [--alice focal|offfocal_l|offfocal_m|offfocal_sum]
//! eprsim marginals [--config FILE] [--state singlet|product]
//! eprsim compare   [--config FILE]
//! eprsim run       [--config FILE] --rule RULE [--events N] [--seed S] [--trials T]
//!                  [--threshold V] [--window W] [--background B] [--efficiency E]
//!                  [--events-dir DIR]
//! ```
//!
//! Every subcommand also takes `--format csv|json` and `--out FILE`.
//! Data goes to standard output (or `--out`), diagnostics to standard error.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 unreadable or
//! malformed config, 3 invalid parameter, 4 invalid run specification.

mod commands;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::experiment::{load_config, AliceSetting, ConfigError, ExperimentConfig, ExperimentError};
use crate::hilbert::HilbertError;
use crate::mc::McError;
use crate::measurement::{MeasurementError, MeasurementRule};

pub use commands::{cmd_compare, cmd_marginals, cmd_pattern, cmd_run, relative_deviation, RunSpec, StateFixture};
pub use report::{parse_csv, Cell, Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVALID_PARAMETER: i32 = 3;
pub const EXIT_INVALID_RUN: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid run specification: {0}")]
    InvalidRun(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(e) if e.is_invalid_parameter() => EXIT_INVALID_PARAMETER,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::InvalidParameter(_) => EXIT_INVALID_PARAMETER,
            CliError::InvalidRun(_) => EXIT_INVALID_RUN,
            CliError::Io(_) | CliError::Internal(_) => EXIT_FAILURE,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::InvalidParameter(e.to_string())
    }
}

impl From<HilbertError> for CliError {
    fn from(e: HilbertError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<MeasurementError> for CliError {
    fn from(e: MeasurementError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::InvalidRun(m) => CliError::InvalidRun(m),
            McError::Config(c) => CliError::Config(c),
            McError::Experiment(x) => x.into(),
            McError::BadWindow { .. } => CliError::InvalidRun(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eprsim", version, about = "Focal-plane signaling experiment: patterns, marginals, Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Geometry config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Write data here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

// Enumerated and numeric flags are taken as text and checked here, so
// each bad value maps onto its own exit code.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic coincidence pattern on Bob's screen.
    Pattern {
        #[command(flatten)]
        common: Common,
        /// focal, offfocal_l, offfocal_m or offfocal_sum.
        #[arg(long, default_value = "focal")]
        alice: String,
    },
    /// Bob's reduced states for Alice's focal and off-focal settings.
    Marginals {
        #[command(flatten)]
        common: Common,
        /// singlet or product.
        #[arg(long, default_value = "singlet")]
        state: String,
    },
    /// Field-correlation rates against measurement-rule expectations.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Seeded Monte Carlo trials of Bob's one-bit decoder.
    Run {
        #[command(flatten)]
        common: Common,
        /// VonNeumannOffFocal, LuedersFocal or CoherentFocal.
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, default_value = "1000", allow_hyphen_values = true)]
        events: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        seed: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        trials: String,
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        threshold: String,
        /// Moving-average width for the visibility estimate.
        #[arg(long, default_value_t = crate::mc::DEFAULT_WINDOW.to_string(), allow_hyphen_values = true)]
        window: String,
        /// Fraction of events replaced by uniform noise.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        background: String,
        /// Detection probability per emitted pair.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        efficiency: String,
        /// Directory for per-trial event logs.
        #[arg(long)]
        events_dir: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate()?;
    for w in cfg.geometry.warnings() {
        eprintln!("eprsim: warning: {w}");
    }
    Ok(cfg)
}

fn run_number<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::InvalidRun(format!("--{flag} {raw:?} is not a valid value")))
}

/// Parses and executes one command, returning the report and where to send it.
pub fn execute(cli: &Cli) -> Result<(Report, Format, Option<PathBuf>), CliError> {
    let common = match &cli.command {
        Command::Pattern { common, .. }
        | Command::Marginals { common, .. }
        | Command::Compare { common }
        | Command::Run { common, .. } => common,
    };
    let format: Format = common.format.parse().map_err(CliError::InvalidParameter)?;
    let cfg = load(common)?;

    let report = match &cli.command {
        Command::Pattern { alice, .. } => {
            let alice: AliceSetting = alice.parse().map_err(CliError::InvalidParameter)?;
            cmd_pattern(&cfg, alice)?
        }
        Command::Marginals { state, .. } => {
            let fixture: StateFixture = state.parse().map_err(CliError::InvalidParameter)?;
            cmd_marginals(&cfg, fixture)?
        }
        Command::Compare { .. } => cmd_compare(&cfg)?,
        Command::Run {
            rule,
            events,
            seed,
            trials,
            threshold,
            window,
            background,
            efficiency,
            events_dir,
            ..
        } => {
            let rule: MeasurementRule = rule
                .as_deref()
                .ok_or_else(|| CliError::InvalidRun("--rule is required".into()))?
                .parse()
                .map_err(|e: MeasurementError| CliError::InvalidRun(e.to_string()))?;
            let spec = RunSpec {
                rule,
                n_events: run_number("events", events)?,
                seed: run_number("seed", seed)?,
                trials: run_number("trials", trials)?,
                threshold: run_number("threshold", threshold)?,
                window: run_number("window", window)?,
                background_rate: run_number("background", background)?,
                efficiency: run_number("efficiency", efficiency)?,
            };
            cmd_run(&cfg, &spec, events_dir.as_deref())?
        }
    };
    Ok((report, format, common.out.clone()))
}

/// Full program: argument parsing, execution, output. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_PARAMETER } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((report, format, out)) => {
            let written = match &out {
                Some(path) => std::fs::write(path, report.render(format)),
                None => report.write_to(format, std::io::stdout().lock()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("eprsim: cannot write output: {e}");
                    EXIT_FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("eprsim: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::Config(ConfigError::Invalid("x".into())).exit_code(), 3);
        assert_eq!(
            CliError::Config(ConfigError::UnknownKey { line: 1, key: "k".into() }).exit_code(),
            2
        );
        assert_eq!(CliError::from(McError::InvalidRun("t".into())).exit_code(), 4);
        assert_eq!(CliError::from(ExperimentError::TooFewBins { min: 2, got: 1 }).exit_code(), 3);
    }

    #[test]
    fn relative_deviation_edges() {
        assert_eq!(relative_deviation(0.0, 0.0), 0.0);
        assert_eq!(relative_deviation(1.0, 0.0), 1.0);
        assert!((relative_deviation(2.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parses_run_flags() {
        let cli = Cli::try_parse_from(["eprsim", "run", "--rule", "CoherentFocal", "--seed", "7"]).unwrap();
        let Command::Run { seed, trials, .. } = &cli.command else { panic!() };
        assert_eq!(seed, "7");
        assert_eq!(trials, "1");
    }
}
