//! Diagonal scaling of sample covariance matrices.
//!
//! Given a sample covariance matrix `S`, the diagonal-scaling problem asks for
//! the positive vector `w` with `diag(w) S diag(w) 1 = 1`. This crate solves
//! that problem, evaluates the replica-theory predictions for how far the
//! solution drifts from its population counterpart when `n/p` stays bounded,
//! and runs the seeded Monte Carlo experiments that compare the two.
//!
//! Modules:
//! - [`covmodel`]: population covariance models and random samples.
//! - [`scaling`]: the Newton solver for the scaling equation.
//! - [`replica`]: saddle-point predictions for the cosine similarity.
//! - [`wendel`]: solvability probability when `n < p`.
//! - [`harness`]: replicated experiments and quantile summaries.

pub mod covmodel;
mod error;
pub mod harness;
pub mod replica;
pub mod scaling;
mod seed;
pub mod wendel;

pub use covmodel::{CovarianceKind, CovarianceMatrix, CovarianceSpec, DataMatrix, Noise};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, Statistic, SummaryRow, TheoryCurve};
pub use replica::{ReplicaPrediction, SaddleResiduals};
pub use scaling::{ScalingSolution, SolverOptions};
pub use seed::derive_seed;
pub use wendel::SolvabilityPoint;
