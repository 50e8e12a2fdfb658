//! CSV row layouts written by `simulate` and `wendel`.

use diagscale::{CovarianceKind, SolvabilityPoint, SummaryRow};
use serde::{Deserialize, Serialize};

pub fn model_name(kind: &CovarianceKind) -> &'static str {
    match kind {
        CovarianceKind::Identity => "identity",
        CovarianceKind::Spike { .. } => "spike",
        CovarianceKind::PowerLaw => "power-law",
        CovarianceKind::Stepwise => "stepwise",
    }
}

/// One line of `simulate` output. Replications that failed numerically are
/// `reps - n_success - n_unsolvable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub model: String,
    pub omega: Option<f64>,
    pub p: usize,
    pub alpha: f64,
    pub n: usize,
    pub reps: usize,
    pub n_success: usize,
    pub n_unsolvable: usize,
    pub median: Option<f64>,
    pub q05: Option<f64>,
    pub q95: Option<f64>,
    pub theory: Option<f64>,
}

impl SimulationRecord {
    pub fn new(kind: &CovarianceKind, omega: Option<f64>, p: usize, reps: usize, row: &SummaryRow) -> Self {
        SimulationRecord {
            model: model_name(kind).to_string(),
            omega,
            p,
            alpha: row.alpha,
            n: row.n,
            reps,
            n_success: row.n_success,
            n_unsolvable: row.n_unsolvable,
            median: row.median,
            q05: row.q05,
            q95: row.q95,
            theory: row.theory,
        }
    }

    #[cfg(test)]
    pub fn summary(&self) -> SummaryRow {
        SummaryRow {
            alpha: self.alpha,
            n: self.n,
            median: self.median,
            q05: self.q05,
            q95: self.q95,
            theory: self.theory,
            n_success: self.n_success,
            n_unsolvable: self.n_unsolvable,
            n_failed: self.reps - self.n_success - self.n_unsolvable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityRecord {
    pub p: usize,
    pub n: usize,
    pub alpha: f64,
    pub omega: Option<f64>,
    pub exact: Option<f64>,
    pub empirical: Option<f64>,
    pub reps: Option<usize>,
    pub failures: Option<usize>,
}

impl SolvabilityRecord {
    pub fn exact_only(p: usize, n: usize, exact: f64) -> Self {
        SolvabilityRecord {
            p,
            n,
            alpha: n as f64 / p as f64,
            omega: Some(0.0),
            exact: Some(exact),
            empirical: None,
            reps: None,
            failures: None,
        }
    }

    pub fn simulated(pt: &SolvabilityPoint) -> Self {
        SolvabilityRecord {
            p: pt.p,
            n: pt.n,
            alpha: pt.n as f64 / pt.p as f64,
            omega: Some(pt.omega).filter(|o| o.is_finite()),
            exact: pt.exact,
            empirical: Some(pt.empirical).filter(|e| e.is_finite()),
            reps: Some(pt.reps),
            failures: Some(pt.failures),
        }
    }
}

pub fn write_csv<T: Serialize>(out: impl std::io::Write, rows: &[T]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
