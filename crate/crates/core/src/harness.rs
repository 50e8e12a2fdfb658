//! Seeded Monte Carlo experiments over a grid of aspect ratios `α = n/p`.
//!
//! Each grid point draws `reps` independent data sets, solves the scaling
//! equation for each sample covariance, and summarizes a statistic of the
//! estimate by its median and 5%/95% quantiles. Replication `r` at grid index
//! `k` uses the RNG stream `derive_seed(seed, [k, r])`, so results do not
//! depend on how replications are scheduled across threads.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covmodel::{
    build_covariance, build_covariance_with_rng, population_scaling, sample_covariance, CovarianceKind,
    CovarianceSpec, Sampler,
};
use crate::error::{Error, Result};
use crate::replica::{cosine_identity, replica_prediction, ReplicaPrediction};
use crate::scaling::{solve_scaling, SolverOptions};
use crate::seed::derive_seed;

// Tolerance for the population scaling of a realized rotation model.
const REFERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Cosine similarity between the estimate and the population scaling.
    #[default]
    Cosine,
    /// `ŵᵀŵ / p`.
    MacroQ,
    /// `ŵᵀ1 / p`.
    MacroM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryCurve {
    /// Pick the curve matching the model.
    #[default]
    Auto,
    /// Replica prediction for `Σ = I` regardless of the model.
    IdentityCurve,
    /// Replica prediction at the model's `Ω` (0 for non-spike models).
    SpikeCurve,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: CovarianceSpec,
    pub p: usize,
    /// Each grid point uses `n = round(α p)`.
    pub alphas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub statistic: Statistic,
    pub theory: TheoryCurve,
    pub solver: SolverOptions,
}

impl ExperimentConfig {
    pub fn new(model: CovarianceSpec, p: usize, alphas: Vec<f64>, reps: usize, seed: u64) -> Self {
        ExperimentConfig {
            model,
            p,
            alphas,
            reps,
            seed,
            statistic: Statistic::Cosine,
            theory: TheoryCurve::Auto,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_statistic(mut self, statistic: Statistic) -> Self {
        self.statistic = statistic;
        self
    }

    pub fn with_theory(mut self, theory: TheoryCurve) -> Self {
        self.theory = theory;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.solver.validate()?;
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::InvalidConfig("alpha grid is empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {a}")));
        }
        if self.p < 2 {
            return Err(Error::InvalidDimension(format!("p must be at least 2, got {}", self.p)));
        }
        if self.model.kind == CovarianceKind::Stepwise && self.p % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "stepwise model needs an even dimension, got {}",
                self.p
            )));
        }
        if let Some(a) = self.alphas.iter().find(|a| sample_size(**a, self.p) == 0) {
            return Err(Error::InvalidConfig(format!("alpha {a} rounds to zero samples")));
        }
        Ok(())
    }

    /// Theoretical value of the configured statistic at `alpha`, if any.
    pub fn theory_at(&self, alpha: f64) -> Option<f64> {
        if alpha < 1.0 {
            return None;
        }
        let from_replica = |omega: f64| -> Option<f64> {
            if omega < 0.0 {
                return None;
            }
            replica_prediction(omega, alpha).ok().map(|p| pick(&p, self.statistic))
        };
        match self.theory {
            TheoryCurve::None => None,
            TheoryCurve::IdentityCurve => from_replica(0.0),
            TheoryCurve::SpikeCurve => from_replica(self.model.omega().unwrap_or(0.0)),
            TheoryCurve::Auto => match self.model.kind {
                CovarianceKind::Identity => from_replica(0.0),
                CovarianceKind::Spike { omega } => from_replica(omega),
                CovarianceKind::PowerLaw | CovarianceKind::Stepwise => match self.statistic {
                    Statistic::Cosine => cosine_identity(alpha).ok(),
                    Statistic::MacroQ | Statistic::MacroM => None,
                },
            },
        }
    }
}

fn pick(pred: &ReplicaPrediction, stat: Statistic) -> f64 {
    match stat {
        Statistic::Cosine => pred.cosine,
        Statistic::MacroQ => pred.q,
        Statistic::MacroM => pred.m,
    }
}

/// `n = round(α p)`.
pub fn sample_size(alpha: f64, p: usize) -> usize {
    (alpha * p as f64).round() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub alpha: f64,
    pub n: usize,
    /// Quantiles are absent when no replication produced a solution.
    pub median: Option<f64>,
    pub q05: Option<f64>,
    pub q95: Option<f64>,
    pub theory: Option<f64>,
    pub n_success: usize,
    pub n_unsolvable: usize,
    /// Replications where the solver gave up without evidence either way.
    pub n_failed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

/// Median and 90% range by linear interpolation between order statistics.
pub fn summarize(samples: &[f64]) -> Result<Quantiles> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Quantiles {
        median: quantile(&sorted, 0.5),
        q05: quantile(&sorted, 0.05),
        q95: quantile(&sorted, 0.95),
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn cosine_similarity(a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidDimension(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `(Q, m) = (wᵀw/p, wᵀ1/p)`.
pub fn macroscopics(w: &DVector<f64>, p: usize) -> Result<(f64, f64)> {
    if w.len() != p {
        return Err(Error::InvalidDimension(format!("expected length {p}, got {}", w.len())));
    }
    let q = w.norm_squared() / p as f64;
    let m = w.sum() / p as f64;
    debug_assert!(
        q == 0.0 || (m / q.sqrt() - cosine_similarity(w, &DVector::from_element(p, 1.0)).unwrap()).abs() < 1e-12
    );
    Ok((q, m))
}

enum Outcome {
    Solved(f64),
    Unsolvable,
    Failed,
}

/// Runs the experiment grid and returns one summary row per `α`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    let p = cfg.p;

    // Identity and spike models have a fixed Σ and a closed-form w₀.
    let fixed = if cfg.model.is_random() {
        None
    } else {
        let sigma = build_covariance(&cfg.model, p, cfg.seed)?;
        Some((Sampler::new(&sigma)?, population_scaling(&cfg.model, p)?))
    };

    cfg.alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let n = sample_size(alpha, p);
            let outcomes: Vec<Result<Outcome>> = (0..cfg.reps)
                .into_par_iter()
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[k as u64, r as u64]));
                    let (sampler, reference) = match &fixed {
                        Some((s, w0)) => (s.clone(), w0.clone()),
                        None => {
                            let sigma = build_covariance_with_rng(&cfg.model, p, &mut rng)?;
                            let w0 = match cfg.statistic {
                                Statistic::Cosine => {
                                    solve_scaling(&sigma, &cfg.solver.with_tol(REFERENCE_TOL))?.w
                                }
                                _ => DVector::zeros(0),
                            };
                            (Sampler::new(&sigma)?, w0)
                        }
                    };
                    let s = sample_covariance(&sampler.sample(n, cfg.model.noise, &mut rng)?);
                    let w = match solve_scaling(&s, &cfg.solver) {
                        Ok(sol) => sol.w,
                        Err(Error::NotStrictlyCopositive { .. }) => return Ok(Outcome::Unsolvable),
                        Err(Error::NumericalFailure { .. }) => return Ok(Outcome::Failed),
                        Err(e) => return Err(e),
                    };
                    let value = match cfg.statistic {
                        Statistic::Cosine => cosine_similarity(&w, &reference)?,
                        Statistic::MacroQ => macroscopics(&w, p)?.0,
                        Statistic::MacroM => macroscopics(&w, p)?.1,
                    };
                    Ok(Outcome::Solved(value))
                })
                .collect();

            let mut values = Vec::with_capacity(cfg.reps);
            let (mut unsolvable, mut failed) = (0, 0);
            for o in outcomes {
                match o? {
                    Outcome::Solved(v) => values.push(v),
                    Outcome::Unsolvable => unsolvable += 1,
                    Outcome::Failed => failed += 1,
                }
            }
            let quant = summarize(&values).ok();
            Ok(SummaryRow {
                alpha,
                n,
                median: quant.map(|q| q.median),
                q05: quant.map(|q| q.q05),
                q95: quant.map(|q| q.q95),
                theory: cfg.theory_at(alpha),
                n_success: values.len(),
                n_unsolvable: unsolvable,
                n_failed: failed,
            })
        })
        .collect()
}
