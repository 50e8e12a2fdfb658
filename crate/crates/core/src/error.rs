use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("spike strength must exceed -1, got {0}")]
    InvalidOmega(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("covariance matrix is not positive semidefinite (eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not strictly copositive: iterates diverged after {iterations} iterations")]
    NotStrictlyCopositive { iterations: usize },

    #[error("solver did not converge in {iterations} iterations (residual {residual:e})")]
    NumericalFailure { iterations: usize, residual: f64 },

    #[error("copositivity is indeterminate: {0}")]
    Indeterminate(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("empty sample")]
    EmptySample,

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}
