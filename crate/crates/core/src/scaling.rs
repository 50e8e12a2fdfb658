//! Diagonal scaling `diag(w) S diag(w) 1 = 1`.
//!
//! The solution is the unique minimizer over the positive orthant of
//!
//! ```text
//! H(w | S) = -Σ log wᵢ + ½ wᵀ S w
//! ```
//!
//! whose gradient `(S w)ᵢ - 1/wᵢ` vanishes exactly when every row sum of the
//! scaled matrix is one. A minimizer exists iff `S` is strictly copositive;
//! otherwise `H` is unbounded below and the Newton iterates run off to
//! infinity, which is how non-existence is detected.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covmodel::CovarianceMatrix;
use crate::error::{Error, Result};

const DIAG_FLOOR: f64 = 1e-300;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;
// Relative resolution of H below which a decrease cannot be observed.
const OBJECTIVE_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target for the maximum row-sum residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates with `‖w‖∞` above this (or `H` below its negative) are taken
    /// as proof that no solution exists.
    pub divergence_norm: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 200, divergence_norm: 1e8 }
    }
}

impl SolverOptions {
    pub fn with_tol(self, tol: f64) -> Self {
        SolverOptions { tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if !(self.divergence_norm > 0.0) {
            return Err(Error::Domain("divergence_norm must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSolution {
    pub w: DVector<f64>,
    /// `max |wᵢ (S w)ᵢ - 1|` at `w`.
    pub residual: f64,
    pub iterations: usize,
    /// `H(w | S)` at `w`.
    pub objective: f64,
    /// Objective after each accepted step, starting from the initial point.
    pub objective_trace: Vec<f64>,
}

/// `H(w | S) = -Σ log wᵢ + ½ wᵀ S w`.
pub fn hamiltonian(w: &DVector<f64>, s: &CovarianceMatrix) -> Result<f64> {
    check_dims(w, s)?;
    if let Some(i) = w.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("weight {i} is not positive ({})", w[i])));
    }
    Ok(objective(w, &(s.matrix() * w)))
}

fn objective(w: &DVector<f64>, sw: &DVector<f64>) -> f64 {
    -w.iter().map(|v| v.ln()).sum::<f64>() + 0.5 * w.dot(sw)
}

/// `max |wᵢ (S w)ᵢ - 1|`.
pub fn row_sum_residual(w: &DVector<f64>, s: &CovarianceMatrix) -> Result<f64> {
    check_dims(w, s)?;
    Ok(residual(w, &(s.matrix() * w)))
}

fn residual(w: &DVector<f64>, sw: &DVector<f64>) -> f64 {
    w.iter().zip(sw.iter()).map(|(a, b)| (a * b - 1.0).abs()).fold(0.0, f64::max)
}

fn check_dims(w: &DVector<f64>, s: &CovarianceMatrix) -> Result<()> {
    if w.len() != s.p() {
        return Err(Error::InvalidDimension(format!(
            "weight vector has length {}, matrix has order {}",
            w.len(),
            s.p()
        )));
    }
    Ok(())
}

/// Default starting point `wᵢ = 1/√Sᵢᵢ`, exact when `S` is diagonal.
pub fn initial_point(s: &CovarianceMatrix) -> DVector<f64> {
    s.matrix().diagonal().map(|d| d.max(DIAG_FLOOR).sqrt().recip())
}

/// Solves the scaling equation by damped Newton on the Hamiltonian.
pub fn solve_scaling(s: &CovarianceMatrix, opts: &SolverOptions) -> Result<ScalingSolution> {
    solve_scaling_from(s, initial_point(s), opts)
}

/// Same as [`solve_scaling`] from a caller-supplied positive starting point.
pub fn solve_scaling_from(
    s: &CovarianceMatrix,
    start: DVector<f64>,
    opts: &SolverOptions,
) -> Result<ScalingSolution> {
    opts.validate()?;
    check_dims(&start, s)?;
    if start.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("starting point must be positive and finite".into()));
    }
    let sm = s.matrix();
    let p = s.p();

    let mut w = start;
    let mut sw = sm * &w;
    let mut h = objective(&w, &sw);
    let mut trace = vec![h];

    for iter in 0..opts.max_iter {
        let res = residual(&w, &sw);
        if res <= opts.tol {
            return Ok(ScalingSolution { w, residual: res, iterations: iter, objective: h, objective_trace: trace });
        }
        if diverged(&w, h, opts) {
            return Err(Error::NotStrictlyCopositive { iterations: iter });
        }

        let grad = DVector::from_fn(p, |i, _| sw[i] - w[i].recip());
        let dir = newton_direction(sm, &w, &grad);
        let slope = grad.dot(&dir);

        // Largest step of the form 2^-k keeping the iterate positive.
        let mut t = 1.0;
        while w.iter().zip(dir.iter()).any(|(wi, di)| wi + t * di <= 0.0) {
            t *= 0.5;
        }

        let noise = OBJECTIVE_NOISE * h.abs().max(1.0);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = &w + &dir * t;
            let cand_sw = sm * &cand;
            let cand_h = objective(&cand, &cand_sw);
            if cand_h.is_finite() && cand_h <= h + ARMIJO * t * slope && cand_h < h {
                accepted = Some((cand, cand_sw, cand_h));
                break;
            }
            // Near the optimum the predicted decrease is below what H can
            // resolve; fall back to requiring the residual to shrink.
            if -slope < noise && cand_h <= h + noise && residual(&cand, &cand_sw) < res {
                accepted = Some((cand, cand_sw, cand_h));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((nw, nsw, nh)) => {
                w = nw;
                sw = nsw;
                h = nh;
                trace.push(h);
            }
            None => {
                // Far out along a divergent ray the rounding error in wᵀSw
                // swamps the logarithmic decrease, so the search stalls
                // before the iterate reaches the divergence threshold.
                if w.amax() > opts.divergence_norm.sqrt() {
                    return Err(Error::NotStrictlyCopositive { iterations: iter + 1 });
                }
                return Err(Error::NumericalFailure { iterations: iter + 1, residual: res });
            }
        }
    }

    let res = residual(&w, &sw);
    if res <= opts.tol {
        let iterations = opts.max_iter;
        return Ok(ScalingSolution { w, residual: res, iterations, objective: h, objective_trace: trace });
    }
    if diverged(&w, h, opts) {
        return Err(Error::NotStrictlyCopositive { iterations: opts.max_iter });
    }
    Err(Error::NumericalFailure { iterations: opts.max_iter, residual: res })
}

fn diverged(w: &DVector<f64>, h: f64, opts: &SolverOptions) -> bool {
    w.amax() > opts.divergence_norm || h < -opts.divergence_norm
}

/// Solves `(S + diag(1/w²)) d = -grad`. The Hessian is positive definite
/// whenever `S` is PSD; for indefinite `S` a growing diagonal shift is added
/// until the Cholesky factorization succeeds.
fn newton_direction(s: &DMatrix<f64>, w: &DVector<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let mut hess = s.clone();
    for i in 0..w.len() {
        hess[(i, i)] += w[i].powi(-2);
    }
    let scale = hess.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    loop {
        let mut shifted = hess.clone();
        if shift > 0.0 {
            for i in 0..w.len() {
                shifted[(i, i)] += shift;
            }
        }
        if let Some(chol) = shifted.cholesky() {
            return -chol.solve(grad);
        }
        shift = if shift == 0.0 { 1e-8 * scale } else { shift * 10.0 };
    }
}

/// Whether `S` is strictly copositive, decided by whether the scaling
/// equation has a solution.
///
/// This is a certificate through the solver, not a general copositivity
/// test; a solver that neither converges nor diverges yields
/// [`Error::Indeterminate`].
pub fn is_strictly_copositive(s: &CovarianceMatrix, opts: &SolverOptions) -> Result<bool> {
    match solve_scaling(s, opts) {
        Ok(_) => Ok(true),
        Err(Error::NotStrictlyCopositive { .. }) => Ok(false),
        Err(Error::NumericalFailure { iterations, residual }) => Err(Error::Indeterminate(format!(
            "no convergence after {iterations} iterations (residual {residual:e})"
        ))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat(rows: &[&[f64]]) -> CovarianceMatrix {
        CovarianceMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn hamiltonian_values() {
        let id = CovarianceMatrix::identity(2);
        assert_abs_diff_eq!(hamiltonian(&DVector::from_element(2, 1.0), &id).unwrap(), 1.0, epsilon = 1e-15);
        let e = std::f64::consts::E;
        let v = hamiltonian(&DVector::from_vec(vec![e, 1.0]), &id).unwrap();
        assert_abs_diff_eq!(v, -1.0 + (e * e + 1.0) / 2.0, epsilon = 1e-14);
        let ones = mat(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_abs_diff_eq!(hamiltonian(&DVector::from_element(2, 1.0), &ones).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_domain() {
        let id = CovarianceMatrix::identity(2);
        assert!(matches!(hamiltonian(&DVector::from_vec(vec![1.0, 0.0]), &id), Err(Error::Domain(_))));
        assert!(matches!(hamiltonian(&DVector::from_vec(vec![1.0, -1.0]), &id), Err(Error::Domain(_))));
        assert!(matches!(hamiltonian(&DVector::from_vec(vec![1.0]), &id), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn residual_values() {
        let id = CovarianceMatrix::identity(3);
        assert_eq!(row_sum_residual(&DVector::from_element(3, 1.0), &id).unwrap(), 0.0);
        let ones = mat(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(row_sum_residual(&DVector::from_element(2, 1.0), &ones).unwrap(), 1.0);
        let d = mat(&[&[4.0, 0.0], &[0.0, 0.25]]);
        assert_eq!(row_sum_residual(&DVector::from_vec(vec![0.5, 2.0]), &d).unwrap(), 0.0);
    }

    #[test]
    fn identity_solution() {
        let sol = solve_scaling(&CovarianceMatrix::identity(3), &SolverOptions::default()).unwrap();
        assert_eq!(sol.w, DVector::from_element(3, 1.0));
        assert!(sol.residual < 1e-10);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn diagonal_solution() {
        let sol = solve_scaling(&mat(&[&[4.0, 0.0], &[0.0, 0.25]]), &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.w[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.w[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn correlated_pair() {
        let s = mat(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let sol = solve_scaling(&s, &SolverOptions::default()).unwrap();
        let expected = 1.5f64.sqrt().recip();
        assert_abs_diff_eq!(sol.w[0], expected, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.w[1], expected, epsilon = 1e-10);
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn correlated_pair_matches_grid_search() {
        let s = mat(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let sol = solve_scaling(&s, &SolverOptions::default()).unwrap();
        // 2-D grid over [0.5, 1.1]², step 1e-3, then a finer grid around the best point
        let h = |a: f64, b: f64| hamiltonian(&DVector::from_vec(vec![a, b]), &s).unwrap();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=600 {
            for j in 0..=600 {
                let (a, b) = (0.5 + i as f64 * 1e-3, 0.5 + j as f64 * 1e-3);
                let v = h(a, b);
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        assert!((sol.w[0] - best.1).abs() < 1e-3 && (sol.w[1] - best.2).abs() < 1e-3);
        assert!(sol.objective <= best.0 + 1e-12);
    }

    #[test]
    fn indefinite_matrix_is_not_copositive() {
        let s = mat(&[&[1.0, -2.0], &[-2.0, 1.0]]);
        assert!(matches!(solve_scaling(&s, &SolverOptions::default()), Err(Error::NotStrictlyCopositive { .. })));
        assert_eq!(is_strictly_copositive(&s, &SolverOptions::default()), Ok(false));
    }

    #[test]
    fn positive_definite_is_copositive() {
        assert_eq!(is_strictly_copositive(&CovarianceMatrix::identity(4), &SolverOptions::default()), Ok(true));
    }

    #[test]
    fn copositive_but_indefinite_matrix_is_solvable() {
        // Nonnegative entries make any matrix with a positive diagonal strictly copositive.
        let s = mat(&[&[1.0, 3.0], &[3.0, 1.0]]);
        let sol = solve_scaling(&s, &SolverOptions::default()).unwrap();
        assert!(sol.residual < 1e-10);
        assert_abs_diff_eq!(sol.w[0], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn rank_one_with_mixed_signs_is_not_copositive() {
        // x = (1, -1): v = (1, 1) is in the kernel of S = x xᵀ
        let s = mat(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert_eq!(is_strictly_copositive(&s, &SolverOptions::default()), Ok(false));
        // x = (1, 2): S = x xᵀ is strictly copositive
        let s = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(is_strictly_copositive(&s, &SolverOptions::default()), Ok(true));
    }

    #[test]
    fn exhausted_iterations_is_numerical_failure() {
        let s = mat(&[&[2.0, 0.3, 0.1], &[0.3, 1.0, 0.2], &[0.1, 0.2, 0.5]]);
        let opts = SolverOptions { max_iter: 1, ..SolverOptions::default() };
        assert!(matches!(solve_scaling(&s, &opts), Err(Error::NumericalFailure { .. })));
        assert!(matches!(is_strictly_copositive(&s, &opts), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn option_validation() {
        let id = CovarianceMatrix::identity(2);
        let bad = SolverOptions { tol: 0.0, ..SolverOptions::default() };
        assert!(solve_scaling(&id, &bad).is_err());
        let bad = SolverOptions { max_iter: 0, ..SolverOptions::default() };
        assert!(solve_scaling(&id, &bad).is_err());
        assert!(solve_scaling_from(&id, DVector::from_vec(vec![1.0, -1.0]), &SolverOptions::default()).is_err());
    }

    #[test]
    fn objective_trace_is_monotone() {
        let s = mat(&[&[3.0, -0.4, 0.9], &[-0.4, 0.2, 0.05], &[0.9, 0.05, 1.0]]);
        let sol = solve_scaling_from(&s, DVector::from_element(3, 5.0), &SolverOptions::default()).unwrap();
        assert_eq!(sol.objective_trace.len(), sol.iterations + 1);
        for pair in sol.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
        }
        assert!(sol.objective_trace[1] < sol.objective_trace[0]);
    }
}
