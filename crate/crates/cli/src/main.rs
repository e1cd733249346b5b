//! `mermin-sim`: exact analysis, simulation, verification and parameter
//! scans of Mermin's device from a JSON experiment file.
//!
//! Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 a
//! verification check failed.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "mermin-sim", version, about = "Exact and Monte Carlo analysis of Mermin's device")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Experiment JSON file.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for machine-readable outputs.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Number of trials (default: the file's n_trials, else 1000000).
    #[arg(long)]
    pub n: Option<u64>,
    /// Seed (default: the file's seed, else 1).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trial streams; does not affect results.
    #[arg(long, default_value_t = 8)]
    pub streams: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact joint table and conditional statistics.
    Enumerate {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo run with estimates and confidence intervals.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exact + simulation + agreement, independence and invariance checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// |z| threshold for exact-vs-simulation agreement.
        #[arg(long, default_value_t = mermin_core::stats::DEFAULT_Z_THRESHOLD)]
        threshold: f64,
    },
    /// Exact statistics over a grid of detector failure probabilities.
    Scan {
        #[command(flatten)]
        common: Common,
        /// p_a, p_b or p_both.
        #[arg(long, default_value = "p_both")]
        parameter: String,
        /// Comma-separated values in [0, 1), decimals or num/den.
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        grid: Vec<String>,
    },
}

fn threads_from_env() -> Option<usize> {
    std::env::var("MERMIN_SIM_THREADS").ok()?.trim().parse().ok()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    mermin_core::montecarlo::init_thread_pool(threads_from_env());
    let result = match cli.command {
        Command::Enumerate { common } => commands::enumerate(&common),
        Command::Simulate { common, run } => commands::simulate(&common, &run),
        Command::Verify { common, run, threshold } => commands::verify(&common, &run, threshold),
        Command::Scan { common, parameter, grid } => commands::scan(&common, &parameter, &grid),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mermin-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::VerificationFailed(_) => 3,
        }
    }
}
