//! Solvability of the scaling equation when `n < p`.
//!
//! With `S = XᵀX/n`, a solution exists iff `S` is strictly copositive, iff
//! the `p` columns of `X` span a proper convex cone in `Rⁿ`. For columns that
//! are independent and symmetric about the origin (`Σ = I`), Wendel's theorem
//! gives that probability as `Σ_{i<n} C(p-1, i) / 2^{p-1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covmodel::{build_covariance, sample_covariance, CovarianceSpec, Sampler};
use crate::error::{Error, Result};
use crate::scaling::{solve_scaling, SolverOptions};
use crate::seed::derive_seed;

/// Probability that `n` Gaussian samples in dimension `p` (with `Σ = I`)
/// yield a solvable scaling equation.
///
/// Summed in log space; absolute rounding error stays below 1e-12 for
/// `p ≤ 10⁴`.
pub fn wendel_probability(n: usize, p: usize) -> f64 {
    if n >= p {
        return 1.0;
    }
    if n == 0 {
        return 0.0;
    }
    let m = p - 1;
    let log_half = -(m as f64) * std::f64::consts::LN_2;
    // log C(m, i) built up incrementally
    let mut log_terms = Vec::with_capacity(n);
    let mut log_binom = 0.0;
    for i in 0..n {
        if i > 0 {
            log_binom += ((m - i + 1) as f64).ln() - (i as f64).ln();
        }
        log_terms.push(log_binom + log_half);
    }
    let top = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|t| (t - top).exp()).sum();
    (top + sum.ln()).exp().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityPoint {
    pub n: usize,
    pub p: usize,
    pub omega: f64,
    /// Exact probability, only known for `Ω = 0`.
    pub exact: Option<f64>,
    /// Successes over replications that reached a verdict.
    pub empirical: f64,
    pub reps: usize,
    /// Replications where the solver neither converged nor diverged.
    pub failures: usize,
}

impl SolvabilityPoint {
    /// One binomial standard deviation of `empirical` around `prob`.
    pub fn binomial_sd(&self, prob: f64) -> f64 {
        let trials = (self.reps - self.failures).max(1) as f64;
        (prob * (1.0 - prob) / trials).sqrt()
    }
}

/// Fraction of `reps` seeded replications in which the scaling equation for
/// `S = XᵀX/n` has a solution. Replications run in parallel; replication `r`
/// draws from `derive_seed(seed, [r])`.
pub fn empirical_solvability(
    spec: &CovarianceSpec,
    n: usize,
    p: usize,
    reps: usize,
    seed: u64,
) -> Result<SolvabilityPoint> {
    empirical_solvability_with(spec, n, p, reps, seed, &SolverOptions::default())
}

pub fn empirical_solvability_with(
    spec: &CovarianceSpec,
    n: usize,
    p: usize,
    reps: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<SolvabilityPoint> {
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    spec.validate()?;
    let fixed = if spec.is_random() { None } else { Some(Sampler::new(&build_covariance(spec, p, seed)?)?) };

    let verdicts: Vec<Result<Option<bool>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[r as u64]));
            let sampler = match &fixed {
                Some(s) => s.clone(),
                None => {
                    let sigma = crate::covmodel::build_covariance_with_rng(spec, p, &mut rng)?;
                    Sampler::new(&sigma)?
                }
            };
            let s = sample_covariance(&sampler.sample(n, spec.noise, &mut rng)?);
            match solve_scaling(&s, opts) {
                Ok(_) => Ok(Some(true)),
                Err(Error::NotStrictlyCopositive { .. }) => Ok(Some(false)),
                Err(Error::NumericalFailure { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut successes = 0;
    let mut failures = 0;
    for v in verdicts {
        match v? {
            Some(true) => successes += 1,
            Some(false) => {}
            None => failures += 1,
        }
    }
    let decided = reps - failures;
    let empirical = if decided == 0 { f64::NAN } else { successes as f64 / decided as f64 };
    let exact = match spec.omega() {
        Some(o) if o == 0.0 => Some(wendel_probability(n, p)),
        _ => None,
    };
    Ok(SolvabilityPoint { n, p, omega: spec.omega().unwrap_or(f64::NAN), exact, empirical, reps, failures })
}
