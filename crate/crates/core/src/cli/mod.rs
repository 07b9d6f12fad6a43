//! Command-line front end: `sweepcert {validate|certify|simulate} --config FILE`.
//!
//! Exit statuses: 0 pass, 1 numeric failure or violation, 2 configuration
//! error, 3 inconclusive.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_certify, cmd_simulate, cmd_validate, render_table, validate_cell, validate_qnd, BetaChoice, CertifyDocument,
    CheckRow, CheckStatus, FockProximityReport, RunContext, SimulateDocument, Status, OUTPUT_DIR_ENV,
};
pub use config::{BetaSetting, BuiltModel, ConfigError, ExperimentConfig, ModelConfig};

#[derive(Debug, Parser)]
#[command(name = "sweepcert", version, about = "Sweeping certificates for Markov operators")]
struct Cli {
    /// Overrides `output.dir` and the SWEEPCERT_OUTPUT_DIR variable.
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Suppress progress output and tables on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the numeric self-consistency battery and print a table.
    Validate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Check proper subinvariance and local integrability; write certificate.json.
    Certify {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Simulate an ensemble and write family masses per checkpoint.
    Simulate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Config } else { Status::Pass };
        }
    };
    let ctx = RunContext { output_override: cli.output_dir, quiet: cli.quiet };
    match cli.command {
        Command::Validate { config } => cmd_validate(&config, &ctx),
        Command::Certify { config } => cmd_certify(&config, &ctx),
        Command::Simulate { config } => cmd_simulate(&config, &ctx),
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()) as u8)
}
