use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod figures;
mod grid;
mod matrix_file;
mod output;
mod predict;
mod simulate;
mod solve;
mod svg;
mod wendel;

/// Exit statuses. Data goes to stdout, diagnostics to stderr.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Invalid = 1,
    NotCopositive = 2,
    NumericalFailure = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { status: Status::Invalid, message: message.into() }
    }
}

impl From<diagscale::Error> for Failure {
    fn from(e: diagscale::Error) -> Self {
        let status = match e {
            diagscale::Error::NotStrictlyCopositive { .. } => Status::NotCopositive,
            diagscale::Error::NumericalFailure { .. } => Status::NumericalFailure,
            _ => Status::Invalid,
        };
        Failure { status, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::invalid(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::invalid(format!("csv error: {e}"))
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "diagscale", version, about = "Diagonal scaling of sample covariance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve diag(w) S diag(w) 1 = 1 for a matrix read from a CSV file
    Solve(solve::SolveArgs),
    /// Print the replica prediction and its stationarity residuals
    Predict(predict::PredictArgs),
    /// Run a Monte Carlo experiment over an alpha grid
    Simulate(simulate::SimulateArgs),
    /// Solvability probability for n < p (exact formula, optionally simulated)
    Wendel(wendel::WendelArgs),
    /// Simulated solvability frequency (wendel with replications)
    Copositivity(wendel::WendelArgs),
    /// Regenerate the data and plots for the full figure suite
    Figures(figures::FiguresArgs),
}

const THREADS_VAR: &str = "DIAGSCALE_THREADS";

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::invalid(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::invalid(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::Solve(args) => solve::run(args),
        Command::Predict(args) => predict::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Wendel(args) => wendel::run(args, 0),
        Command::Copositivity(args) => wendel::run(args, wendel::COPOSITIVITY_REPS),
        Command::Figures(args) => figures::run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("diagscale: {}", f.message);
            ExitCode::from(f.status as u8)
        }
    }
}

/// Writes to `path`, or stdout when absent.
pub fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn std::io::Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}
