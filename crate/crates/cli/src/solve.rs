use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use diagscale::scaling::{solve_scaling, SolverOptions};

use crate::matrix_file::read_matrix;
use crate::{CliResult, Failure};

#[derive(Args)]
pub struct SolveArgs {
    /// CSV file holding a dense symmetric matrix, one row per line
    matrix: PathBuf,
    /// Tolerance on the maximum row-sum residual
    #[arg(long, default_value_t = SolverOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    max_iter: usize,
}

pub fn run(args: SolveArgs) -> CliResult {
    let s = read_matrix(&args.matrix).map_err(Failure::invalid)?;
    let opts = SolverOptions { tol: args.tol, max_iter: args.max_iter, ..SolverOptions::default() };
    let sol = solve_scaling(&s, &opts)?;
    let w: Vec<String> = sol.w.iter().map(|v| v.to_string()).collect();
    let mut out = std::io::stdout().lock();
    writeln!(out, "w = {}", w.join(" "))?;
    writeln!(out, "residual = {:e}", sol.residual)?;
    writeln!(out, "iterations = {}", sol.iterations)?;
    writeln!(out, "objective = {}", sol.objective)?;
    Ok(())
}
