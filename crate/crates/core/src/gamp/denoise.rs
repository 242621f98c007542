//! Posterior moments of a Bernoulli-Gaussian scalar under AWGN.

use num_complex::Complex64;

use super::BgPrior;
use crate::error::{Error, Result};

/// Posterior mean and variance of `v` given `r = v + CN(0, tau)` under
/// `v ~ (1−ρ)δ₀ + ρ·CN(0, σ)`.
pub fn denoise_input(r: Complex64, tau: f64, prior: &BgPrior) -> Result<(Complex64, f64)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Numeric(format!("pseudo-observation variance must be positive and finite, got {tau}")));
    }
    Ok(posterior(r, tau, prior.rho, prior.sigma_r))
}

#[inline]
pub(crate) fn posterior(r: Complex64, tau: f64, rho: f64, sigma: f64) -> (Complex64, f64) {
    let shrink = sigma / (sigma + tau);
    let active = activation(r.norm_sqr(), tau, rho, sigma);
    let cond_mean = r * shrink;
    let mean = cond_mean * active;
    let var = active * shrink * tau + active * (1.0 - active) * cond_mean.norm_sqr();
    (mean, var.max(0.0))
}

/// Posterior probability that the coefficient is active.
#[inline]
pub(crate) fn activation(r_sq: f64, tau: f64, rho: f64, sigma: f64) -> f64 {
    if rho >= 1.0 {
        return 1.0;
    }
    let log_odds = rho.ln() - (-rho).ln_1p() + tau.ln() - (tau + sigma).ln() + r_sq * sigma / (tau * (tau + sigma));
    if log_odds >= 0.0 {
        1.0 / (1.0 + (-log_odds).exp())
    } else {
        let e = log_odds.exp();
        e / (1.0 + e)
    }
}
