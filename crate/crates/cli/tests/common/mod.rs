#![allow(dead_code)]

use diagscale::covmodel::CovarianceMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Wishart-type SPD matrix `GᵀG/k + δI` with `k = p + extra` Gaussian rows.
pub fn random_spd(p: usize, seed: u64) -> CovarianceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = p + 1 + rng.random_range(0..(2 * p + 2));
    let data: Vec<f64> = (0..k * p).map(|_| rng.sample(StandardNormal)).collect();
    let g = DMatrix::from_row_slice(k, p, &data);
    let mut s = g.tr_mul(&g) / k as f64;
    for i in 0..p {
        s[(i, i)] += 0.05;
    }
    let s = (&s + s.transpose()) * 0.5;
    CovarianceMatrix::new(s).unwrap()
}

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section(f: &mut dyn FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Brute-force minimizer of `-Σ log wᵢ + ½ wᵀSw` over `[lo, hi]^p` by nested
/// golden-section search, one coordinate per level. Partial minimization of a
/// jointly convex function is convex, so every level is unimodal.
pub fn brute_force_scaling(s: &DMatrix<f64>, lo: f64, hi: f64, tol: f64) -> DVector<f64> {
    let p = s.nrows();
    fn h(s: &DMatrix<f64>, w: &[f64]) -> f64 {
        let v = DVector::from_column_slice(w);
        -w.iter().map(|x| x.ln()).sum::<f64>() + 0.5 * v.dot(&(s * &v))
    }
    fn level(s: &DMatrix<f64>, prefix: &mut Vec<f64>, p: usize, lo: f64, hi: f64, tol: f64) -> (f64, Vec<f64>) {
        if prefix.len() == p {
            return (h(s, prefix), prefix.clone());
        }
        let mut best = (f64::INFINITY, Vec::new());
        let mut f = |x: f64| {
            prefix.push(x);
            let r = level(s, prefix, p, lo, hi, tol);
            prefix.pop();
            if r.0 < best.0 {
                best = r.clone();
            }
            r.0
        };
        golden_section(&mut f, lo, hi, tol);
        best
    }
    let (_, w) = level(s, &mut Vec::with_capacity(p), p, lo, hi, tol);
    DVector::from_vec(w)
}
