//! Command-line front end: loads JSON configs (bundled presets or files),
//! runs the steady-state / dynamic pipelines, and writes CSV, JSON-lines
//! and SVG artifacts. Exit status: 0 success, 1 domain error, 2 usage
//! error.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "zeldovich",
    about = "Simulator and analysis workbench for a rotating-cylinder electromagnetic amplifier",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Config file path, or the name of a bundled preset
    /// (table1_highR, table1_lowR, fig4_openloop_643, fig4_openloop_660,
    /// closedloop_700).
    #[arg(long)]
    pub config: String,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override a config value by dotted key, e.g.
    /// `--set cylinder.coupling_a=0.397`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Override the random seed (simulate configs only).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress progress output on stdout.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency sweep of the three-phase transfer function.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Drop the cylinder from the model (bare-circuit baseline).
        #[arg(long)]
        no_cylinder: bool,
    },
    /// Net-resistance stability map over drive frequency and rotation.
    Map {
        #[command(flatten)]
        common: CommonArgs,
        /// Drop the cylinder from the model.
        #[arg(long)]
        no_cylinder: bool,
    },
    /// Fit coupling constant and circuit resistance to R(F) data.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Time-domain envelope simulation of a scenario.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Waveform analysis: band-pass, envelope, net resistance, spectrogram.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Errors are split by exit status: usage errors (bad flags, bad config
/// keys, missing files) exit 2; domain errors (model rejects the inputs)
/// exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(m) => write!(f, "error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep {
            common,
            no_cylinder,
        } => commands::sweep(&common, no_cylinder),
        Command::Map {
            common,
            no_cylinder,
        } => commands::map(&common, no_cylinder),
        Command::Fit { common } => commands::fit(&common),
        Command::Simulate { common } => commands::simulate(&common),
        Command::Analyze { common } => commands::analyze(&common),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Domain(_) => ExitCode::from(1),
                CliError::Usage(_) => ExitCode::from(2),
            }
        }
    }
}
