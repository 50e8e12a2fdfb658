//! Replica-symmetric predictions for the scaled estimator under the spike
//! model `Σ = Ω 11ᵀ/p + I` as `p → ∞` with `n/p → α ≥ 1`.
//!
//! The saddle point is parameterized by `(ν, μ, η, w²)`. For `Ω > 0`, three of
//! the stationarity conditions give `η`, `w²` and `ν` in closed form in terms
//! of `μ`, and `μ` itself minimizes the strictly convex
//!
//! ```text
//! g(μ) = μ/2 + (Ω+1) / (2Ω(Ωμ+1)) + ½ log[(Ωμ+2) / ((Ωμ+1)(Ωμ+2-1/α))]
//! ```
//!
//! The limiting cosine similarity between the estimate and the population
//! scaling vector is `μ/√ν`. At `Ω = 0` everything is explicit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limiting cosine similarity for `Σ = I`:
/// `(1 - 3/(8α)) / √(1 - 1/(2α))`.
pub fn cosine_identity(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((1.0 - 3.0 / (8.0 * alpha)) / (1.0 - 1.0 / (2.0 * alpha)).sqrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0) {
        return Err(Error::Domain(format!(
            "replica predictions need alpha = n/p >= 1, got {alpha}"
        )));
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "replica predictions are only available for omega >= 0, got {omega}"
        )));
    }
    Ok(())
}

/// The reduced objective `g(μ)` for fixed `(Ω, α)` with `Ω > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleObjective {
    omega: f64,
    alpha: f64,
}

impl SaddleObjective {
    pub fn new(omega: f64, alpha: f64) -> Result<Self> {
        check_omega(omega)?;
        if omega == 0.0 {
            return Err(Error::Domain("g(mu) needs omega > 0".into()));
        }
        check_alpha(alpha)?;
        Ok(SaddleObjective { omega, alpha })
    }

    fn check_mu(mu: f64) -> Result<()> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        Ok(())
    }

    pub fn value(&self, mu: f64) -> Result<f64> {
        Self::check_mu(mu)?;
        let (o, c) = (self.omega, self.alpha.recip());
        let a = o * mu + 1.0;
        Ok(mu / 2.0 + (o + 1.0) / (2.0 * o * a) + 0.5 * ((a + 1.0).ln() - a.ln() - (a + 1.0 - c).ln()))
    }

    pub fn derivative(&self, mu: f64) -> Result<f64> {
        Self::check_mu(mu)?;
        Ok(0.5 * self.omega * self.reduced_derivative(mu))
    }

    pub fn second_derivative(&self, mu: f64) -> Result<f64> {
        Self::check_mu(mu)?;
        let (o, c) = (self.omega, self.alpha.recip());
        let a = o * mu + 1.0;
        let bracket = 2.0 * (1.0 + o) / a.powi(3) + o / a.powi(2) - o / (a + 1.0).powi(2) + o / (a + 1.0 - c).powi(2);
        Ok(0.5 * o * bracket)
    }

    /// `g'(μ) / (Ω/2)`. The `1/2 - (Ω+1)/(2(Ωμ+1)²)` part of `g'` is
    /// rewritten as `Ω(Ωμ² + 2μ - 1) / (2(Ωμ+1)²)` so that nothing of order
    /// one cancels when `Ω` is small. Also well defined at `μ = 0`.
    fn reduced_derivative(&self, mu: f64) -> f64 {
        let (o, c) = (self.omega, self.alpha.recip());
        let a = o * mu + 1.0;
        (o * mu * mu + 2.0 * mu - 1.0) / (a * a) + 1.0 / (a + 1.0) - 1.0 / a - 1.0 / (a + 1.0 - c)
    }

    /// The unique minimizer of `g` on `μ > 0`.
    ///
    /// `g'(0) < 0` and `g'(μ) → 1/2`, so the root of `g'` is bracketed by
    /// doubling an upper bound, then refined by Newton steps that fall back to
    /// bisection whenever they leave the bracket.
    pub fn minimize(&self) -> f64 {
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.reduced_derivative(hi) <= 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        self.refine(lo, hi)
    }

    fn refine(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut mu = 0.5 * (lo + hi);
        for _ in 0..200 {
            let d = self.reduced_derivative(mu);
            if d == 0.0 {
                return mu;
            }
            if d < 0.0 {
                lo = mu;
            } else {
                hi = mu;
            }
            let curvature = self.second_derivative(mu).unwrap_or(f64::NAN) / (0.5 * self.omega);
            let newton = mu - d / curvature;
            let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - mu).abs() <= 2.0 * f64::EPSILON * mu.abs() || hi - lo <= 2.0 * f64::EPSILON * hi {
                return next;
            }
            mu = next;
        }
        mu
    }
}

pub fn g_value(mu: f64, omega: f64, alpha: f64) -> Result<f64> {
    SaddleObjective::new(omega, alpha)?.value(mu)
}

pub fn g_prime(mu: f64, omega: f64, alpha: f64) -> Result<f64> {
    SaddleObjective::new(omega, alpha)?.derivative(mu)
}

pub fn g_second(mu: f64, omega: f64, alpha: f64) -> Result<f64> {
    SaddleObjective::new(omega, alpha)?.second_derivative(mu)
}

pub fn minimize_g(omega: f64, alpha: f64) -> Result<f64> {
    Ok(SaddleObjective::new(omega, alpha)?.minimize())
}

/// Saddle point and the derived macroscopic quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaPrediction {
    pub omega: f64,
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub eta: f64,
    pub w2: f64,
    /// Limit of `ŵᵀŵ / p`, equal to `w² ν`.
    #[serde(rename = "Q")]
    pub q: f64,
    /// Limit of `ŵᵀ1 / p`, equal to `w μ` with `w = √w²`.
    pub m: f64,
    pub chi: f64,
    pub cosine: f64,
}

/// Evaluates the saddle point for `Ω ≥ 0`, `α ≥ 1`.
pub fn replica_prediction(omega: f64, alpha: f64) -> Result<ReplicaPrediction> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    let c = alpha.recip();
    let (mu, nu, eta, w2) = if omega == 0.0 {
        let w2 = 1.0 / (1.0 - c / 2.0);
        (w2 * (1.0 - 3.0 * c / 8.0), w2, 0.5, w2)
    } else {
        let mu = SaddleObjective { omega, alpha }.minimize();
        let a = omega * mu + 1.0;
        let eta = a / (a + 1.0);
        let w2 = (a + 1.0) / (a * (a + 1.0 - c));
        // -Ωμ² + a(a+1)/(a+1-c), regrouped to keep the O(Ω) terms from cancelling
        let nu = 1.0 + omega * mu * (1.0 - mu) + a * c / (a + 1.0 - c);
        (mu, nu, eta, w2)
    };
    Ok(ReplicaPrediction {
        omega,
        alpha,
        mu,
        nu,
        eta,
        w2,
        q: w2 * nu,
        m: w2.sqrt() * mu,
        chi: w2 * eta,
        cosine: mu / nu.sqrt(),
    })
}

/// Partial derivatives of `g(ν, μ, η, w²)` at a candidate saddle point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleResiduals {
    pub r_nu: f64,
    pub r_mu: f64,
    pub r_eta: f64,
    pub r_w2: f64,
}

impl SaddleResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.r_nu, self.r_mu, self.r_eta, self.r_w2].iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn stationarity_residuals(pred: &ReplicaPrediction) -> SaddleResiduals {
    let ReplicaPrediction { omega, alpha, mu, nu, eta, w2, .. } = *pred;
    let d = 1.0 + w2 * eta / alpha;
    let signal = omega * mu * mu + nu;
    SaddleResiduals {
        r_nu: -w2 / (2.0 * d) + 1.0 / (2.0 * eta) - 0.5,
        r_mu: -w2 * omega * mu / d - 1.0 / eta + 2.0,
        r_eta: w2 * w2 * signal / (2.0 * alpha * d * d) - (nu / 2.0 - mu + 0.5) / (eta * eta),
        r_w2: -signal / (2.0 * d * d) + 1.0 / (2.0 * w2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_identity_values() {
        assert_abs_diff_eq!(cosine_identity(1.0).unwrap(), 5.0 * 2f64.sqrt() / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cosine_identity(1e12).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(cosine_identity(2.0).unwrap(), 0.8125 / 0.75f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cosine_identity(2.0).unwrap(), 0.9381942, epsilon = 1e-7);
        assert!(matches!(cosine_identity(0.99), Err(Error::Domain(_))));
        assert!(cosine_identity(f64::NAN).is_err());
    }

    #[test]
    fn g_domain() {
        assert!(g_value(0.0, 1.0, 1.0).is_err());
        assert!(g_value(1.0, 0.0, 1.0).is_err());
        assert!(g_value(1.0, -1.0, 1.0).is_err());
        assert!(g_value(1.0, 1.0, 0.5).is_err());
        assert!(minimize_g(0.0, 2.0).is_err());
    }

    #[test]
    fn g_is_strictly_convex_on_grid() {
        for &mu in &[0.1, 1.0, 10.0] {
            for &omega in &[0.1, 1.0, 100.0] {
                for &alpha in &[1.0, 4.0] {
                    assert!(g_second(mu, omega, alpha).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let step = 1e-6;
        for &mu in &[0.3, 1.0, 2.5] {
            for &omega in &[0.5, 1.0, 10.0] {
                for &alpha in &[1.0, 3.0] {
                    let f = |m: f64| g_value(m, omega, alpha).unwrap();
                    let fd = (f(mu + step) - f(mu - step)) / (2.0 * step);
                    let gp = g_prime(mu, omega, alpha).unwrap();
                    assert!((fd - gp).abs() <= 1e-6 * gp.abs().max(1.0), "g' {gp} vs fd {fd}");
                    let d = |m: f64| g_prime(m, omega, alpha).unwrap();
                    let fd2 = (d(mu + step) - d(mu - step)) / (2.0 * step);
                    let gpp = g_second(mu, omega, alpha).unwrap();
                    assert!((fd2 - gpp).abs() <= 1e-6 * gpp.abs().max(1.0), "g'' {gpp} vs fd {fd2}");
                }
            }
        }
    }

    #[test]
    fn g_grows_like_half_mu() {
        let g = |m: f64| g_value(m, 1.0, 1.0).unwrap();
        assert!(g(1e3) < g(1e4) && g(1e4) < g(1e5));
        assert_abs_diff_eq!(g(1e8) / 1e8, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn minimizer_satisfies_first_order_condition() {
        for &omega in &[1e-3, 0.1, 1.0, 10.0, 100.0, 1e4] {
            for &alpha in &[1.0, 1.5, 4.0, 1e3] {
                let obj = SaddleObjective::new(omega, alpha).unwrap();
                let mu = obj.minimize();
                let gp = obj.derivative(mu).unwrap();
                let gpp = obj.second_derivative(mu).unwrap();
                assert!(gp.abs() <= 1e-12 * (gpp * mu).max(1.0), "Ω={omega} α={alpha}: g'={gp}");
            }
        }
    }

    #[test]
    fn minimizer_is_independent_of_bracket() {
        for &(omega, alpha) in &[(0.1, 1.0), (1.0, 2.0), (100.0, 8.0)] {
            let obj = SaddleObjective::new(omega, alpha).unwrap();
            let a = obj.minimize();
            let b = obj.refine(1e-9, 64.0);
            let c = obj.refine(0.0, 1e3);
            assert!((a - b).abs() < 1e-10 && (a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn small_omega_limit_of_minimizer() {
        let alpha = 2.0;
        let limit = (1.0 - 3.0 / (8.0 * alpha)) / (1.0 - 1.0 / (2.0 * alpha));
        assert_abs_diff_eq!(limit, 1.0833333, epsilon = 1e-7);
        assert!((minimize_g(1e-8, alpha).unwrap() - limit).abs() < 1e-5);
    }

    #[test]
    fn large_omega_and_large_alpha_limits_of_minimizer() {
        assert!((minimize_g(1e8, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((minimize_g(1.0, 1e8).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_prediction_in_closed_form() {
        let p = replica_prediction(0.0, 1.0).unwrap();
        assert_eq!(p.eta, 0.5);
        assert_eq!(p.w2, 2.0);
        assert_eq!(p.nu, 2.0);
        assert_eq!(p.mu, 1.25);
        assert_abs_diff_eq!(p.cosine, 1.25 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.cosine, 0.8838835, epsilon = 1e-7);
        assert!(stationarity_residuals(&p).max_abs() < 1e-12);
    }

    #[test]
    fn prediction_limits() {
        assert!((replica_prediction(1e8, 1.0).unwrap().cosine - 1.0).abs() < 1e-3);
        let p = replica_prediction(1e-8, 4.0).unwrap();
        assert!((p.cosine - cosine_identity(4.0).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn prediction_domain() {
        assert!(replica_prediction(-0.5, 1.0).is_err());
        assert!(replica_prediction(1.0, 0.9).is_err());
        assert!(replica_prediction(f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn residuals_vanish_at_prediction() {
        let p = replica_prediction(1.0, 2.0).unwrap();
        let r = stationarity_residuals(&p);
        assert!(r.max_abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn perturbed_mu_breaks_stationarity() {
        let mut p = replica_prediction(1.0, 2.0).unwrap();
        p.mu += 0.1;
        assert!(stationarity_residuals(&p).r_mu.abs() > 1e-3);
    }

    #[test]
    fn continuity_at_zero_omega() {
        for &alpha in &[1.0, 2.0, 10.0] {
            let a = replica_prediction(1e-10, alpha).unwrap();
            let b = replica_prediction(0.0, alpha).unwrap();
            for (x, y) in [(a.mu, b.mu), (a.nu, b.nu), (a.eta, b.eta), (a.w2, b.w2)] {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn two_cosine_routes_agree() {
        for &(omega, alpha) in &[(0.0, 1.0), (0.1, 3.0), (10.0, 1.5), (1e3, 2.0)] {
            let p = replica_prediction(omega, alpha).unwrap();
            assert!((p.cosine - p.m / p.q.sqrt()).abs() < 1e-14);
        }
    }
}
