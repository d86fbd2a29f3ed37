//! `coxgibbs` — survival-model fitting from the command line.
//!
//! Subcommands: `simulate` (synthetic datasets), `fit` (Gibbs or
//! Metropolis-Hastings posterior sampling), `calibrate` (bootstrap coverage
//! calibration of the learning rate), and `bench` (scenario grids).
//!
//! Exit codes: 0 on success, 1 on runtime or numerical failure (a
//! structured JSON error is printed to stderr), 2 on flag validation
//! problems. The `COXGIBBS_THREADS` environment variable sets the worker
//! thread count for the Gibbs latent pass (0 = single-threaded reference
//! mode; results are identical for any value).

mod bench;
mod calibrate;
mod fit;
mod manifest;
mod simulate;

use clap::{Parser, Subcommand};
use coxgibbs::export::Json;
use coxgibbs::CoxError;

#[derive(Parser)]
#[command(
    name = "coxgibbs",
    version,
    about = "Bayesian Cox proportional hazards fitting via Gibbs sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic survival dataset CSV.
    Simulate(simulate::SimulateArgs),
    /// Fit a model and write report, samples, and manifest artifacts.
    Fit(fit::FitArgs),
    /// Calibrate the learning rate by bootstrap coverage.
    Calibrate(calibrate::CalibrateArgs),
    /// Run a scenario grid and write a metrics table.
    Bench(bench::BenchArgs),
}

/// CLI-level failure, split by exit code.
pub enum AppError {
    /// Bad flag values: exit 2, plain-text message.
    Usage(String),
    /// Anything that went wrong after flags validated: exit 1, JSON error.
    Runtime(CoxError),
}

impl From<CoxError> for AppError {
    fn from(e: CoxError) -> Self {
        AppError::Runtime(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(CoxError::Io(e))
    }
}

pub type AppResult<T> = Result<T, AppError>;

pub fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

/// Worker threads for the Gibbs latent pass, from `COXGIBBS_THREADS`.
pub fn threads_from_env() -> AppResult<usize> {
    match std::env::var("COXGIBBS_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            usage(format!(
                "COXGIBBS_THREADS must be a non-negative integer, got '{v}'"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn error_json(e: &CoxError) -> String {
    Json::Obj(vec![(
        "error",
        Json::Obj(vec![
            ("kind", Json::Str(e.kind().to_string())),
            ("message", Json::Str(e.to_string())),
        ]),
    )])
    .render()
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Fit(args) => fit::run(args),
        Command::Calibrate(args) => calibrate::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match outcome {
        Ok(()) => {}
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(AppError::Runtime(e)) => {
            eprint!("{}", error_json(&e));
            std::process::exit(1);
        }
    }
}
