//! `vexpdo`: drive the variable-exponent pseudodifferential toolkit from one
//! TOML config per experiment.
//!
//! Exit codes: 0 success, 1 acceptance failure (failed verification or a
//! non-Fredholm verdict), 2 configuration error, 3 numeric error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Sink;
use config::ExperimentConfig;

/// Failure classes aligned with the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: a verification or verdict gate failed.
    Acceptance(String),
    /// Exit 2: the configuration (file or flags) is invalid.
    Config(String),
    /// Exit 3: a numeric operation failed at runtime.
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Acceptance(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Acceptance(m) | CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

/// Report format; `table` is the human-readable default of `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "vexpdo",
    version,
    about = "Variable-exponent spaces, maximal operators, and pseudodifferential operators on sampled grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the Luxemburg norm of the configured function.
    Norm(RunArgs),
    /// Run the exponent regularity and decomposition checks.
    CheckExponent(RunArgs),
    /// Apply an operator (pseudodifferential or maximal) to the function.
    Apply(RunArgs),
    /// Run the full regularizer pipeline and residual decay tables.
    Fredholm(RunArgs),
    /// Run the verification suite (all checks or one module).
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment configuration (TOML sections of key = value pairs).
    #[arg(long)]
    config: PathBuf,
    /// Report format; overrides [output] format (default json).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Optional configuration; the suite runs on built-in defaults without.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report format; default is a human-readable table.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Restrict the suite to one module's checks.
    #[arg(long)]
    only: Option<String>,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve_format(
    flag: Option<Format>,
    config: &ExperimentConfig,
    default: Format,
) -> Result<Format, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match config.output.format.as_deref() {
        None => Ok(default),
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some("table") => Ok(Format::Table),
        Some(other) => Err(CliError::Config(format!(
            "output.format: unknown format {other:?} (expected json, csv, or table)"
        ))),
    }
}

fn resolve_sink(flag: Option<PathBuf>, config: &ExperimentConfig) -> Sink {
    Sink::new(flag.or_else(|| config.output.path.clone().map(PathBuf::from)))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Norm(args) => {
            let config = ExperimentConfig::load(&args.config)?;
            let format = resolve_format(args.format, &config, Format::Json)?;
            let sink = resolve_sink(args.out, &config);
            commands::cmd_norm(&config, format, &sink)
        }
        Command::CheckExponent(args) => {
            let config = ExperimentConfig::load(&args.config)?;
            let format = resolve_format(args.format, &config, Format::Json)?;
            let sink = resolve_sink(args.out, &config);
            commands::cmd_check_exponent(&config, format, &sink)
        }
        Command::Apply(args) => {
            let config = ExperimentConfig::load(&args.config)?;
            let format = resolve_format(args.format, &config, Format::Json)?;
            let sink = resolve_sink(args.out, &config);
            commands::cmd_apply(&config, format, &sink)
        }
        Command::Fredholm(args) => {
            let config = ExperimentConfig::load(&args.config)?;
            let format = resolve_format(args.format, &config, Format::Json)?;
            let sink = resolve_sink(args.out, &config);
            commands::cmd_fredholm(&config, format, &sink)
        }
        Command::Verify(args) => {
            let config = match &args.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            let format = resolve_format(args.format, &config, Format::Table)?;
            let sink = resolve_sink(args.out, &config);
            commands::cmd_verify(&config, format, args.only.as_deref(), &sink)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vexpdo: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
