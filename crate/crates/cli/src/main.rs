//! `annulus`: bandwidth selection under correlated errors, covariance
//! estimation and the simulation study, from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{load, BenchOpts, CovarianceOpts, ElbowOpts, FitOpts, SimulateOpts};
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "annulus", version, about)]
struct Cli {
    /// Flat TOML file of options for the subcommand; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true, env = "ANNULUS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select h_z with the zero-annulus kernel, convert to h_o and fit.
    Fit(FitOpts),
    /// Tabulate C-bar against the inner radius and pick the first stable c1.
    Elbow(ElbowOpts),
    /// Fit, calibrate the covariance bandwidth and estimate the error correlation.
    Covariance(CovarianceOpts),
    /// Run seeded simulation scenarios and write summary tables.
    Simulate(SimulateOpts),
    /// Time the main pipeline stages on one simulated sample.
    Bench(BenchOpts),
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    }
    let file = cli.config.as_deref();
    match cli.command {
        Command::Fit(o) => commands::fit::run(o.overlay(load(file)?).with_defaults()),
        Command::Elbow(o) => commands::elbow::run(o.overlay(load(file)?).with_defaults()),
        Command::Covariance(o) => commands::covariance::run(o.overlay(load(file)?).with_defaults()),
        Command::Simulate(o) => commands::simulate::run(o.overlay(load(file)?).with_defaults()),
        Command::Bench(o) => commands::bench::run(o.overlay(load(file)?).with_defaults()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
