use std::path::PathBuf;

use clap::Args;
use diagscale::harness::sample_size;
use diagscale::wendel::{empirical_solvability, wendel_probability};
use diagscale::{derive_seed, CovarianceSpec};
use rayon::prelude::*;

use crate::grid::{parse_counts, parse_reals};
use crate::output::{write_csv, SolvabilityRecord};
use crate::{open_output, CliResult, Failure};

/// Replications used by `copositivity` when `--reps` is not given.
pub const COPOSITIVITY_REPS: usize = 1000;

#[derive(Args)]
pub struct WendelArgs {
    #[arg(long)]
    p: usize,
    /// Sample sizes, e.g. `1..10` or `3,5,7`
    #[arg(long, conflicts_with = "alphas", required_unless_present = "alphas")]
    ns: Option<String>,
    /// Sample ratios n/p; n is rounded
    #[arg(long)]
    alphas: Option<String>,
    /// Spike strength of the sampling model (> -1)
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Simulated replications per grid point; omit for the exact law only
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// `default_reps == 0` means exact-only unless `--reps` is given.
pub fn run(args: WendelArgs, default_reps: usize) -> CliResult {
    if args.p == 0 {
        return Err(Failure::invalid("--p must be at least 1"));
    }
    let ns = match (&args.ns, &args.alphas) {
        (Some(raw), _) => parse_counts(raw).map_err(|e| Failure::invalid(format!("--ns: {e}")))?,
        (None, Some(raw)) => parse_reals(raw)
            .map_err(|e| Failure::invalid(format!("--alphas: {e}")))?
            .into_iter()
            .map(|a| if a > 0.0 && a.is_finite() { Ok(sample_size(a, args.p)) } else { Err(a) })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|a| Failure::invalid(format!("alpha must be positive, got {a}")))?,
        (None, None) => unreachable!("clap requires one grid"),
    };
    if ns.contains(&0) {
        return Err(Failure::invalid("grid contains n = 0"));
    }
    let omega = args.omega.unwrap_or(0.0);
    let reps = args.reps.unwrap_or(default_reps);

    let records = if reps == 0 {
        if omega != 0.0 {
            return Err(Failure::invalid("the exact law covers omega = 0 only; pass --reps to simulate"));
        }
        ns.iter().map(|&n| SolvabilityRecord::exact_only(args.p, n, wendel_probability(n, args.p))).collect()
    } else {
        let spec = if omega == 0.0 { CovarianceSpec::identity() } else { CovarianceSpec::spike(omega)? };
        ns.par_iter()
            .enumerate()
            .map(|(k, &n)| {
                let seed = derive_seed(args.seed, &[k as u64]);
                empirical_solvability(&spec, n, args.p, reps, seed).map(|pt| SolvabilityRecord::simulated(&pt))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    write_csv(open_output(args.csv.as_ref())?, &records)?;
    Ok(())
}
