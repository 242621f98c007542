//! Exact Bernoulli-Gaussian MMSE by enumerating every support.
//!
//! Cost is `2ⁿ` Cholesky factorizations of an `m × m` matrix, so this is
//! only usable as a reference on tiny problems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::BgPrior;
use crate::error::{Error, Result};

pub const MAX_ENUMERATION_DIM: usize = 14;

/// Posterior mean of `v` given `y = c·A·v + CN(0, N₀I)`.
pub fn exact_mmse_oracle(
    dense_a: &DMatrix<Complex64>,
    y: &[Complex64],
    c: f64,
    noise_var: f64,
    prior: &BgPrior,
) -> Result<Vec<Complex64>> {
    let (m, n) = dense_a.shape();
    if n > MAX_ENUMERATION_DIM {
        return Err(Error::TooLarge { dim: n, max: MAX_ENUMERATION_DIM });
    }
    if y.len() != m {
        return Err(Error::Config(format!("y has {} entries, A has {m} rows", y.len())));
    }
    if !(noise_var > 0.0) {
        return Err(Error::Numeric("noise variance must be positive".into()));
    }
    let y = DVector::from_column_slice(y);
    let log_on = prior.rho.ln();
    let log_off = (-prior.rho).ln_1p();
    let sigma = prior.sigma_r;

    let mut log_weights = Vec::with_capacity(1 << n);
    let mut means: Vec<DVector<Complex64>> = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let k = support.len();
        let mut log_prior = 0.0;
        if k > 0 {
            log_prior += k as f64 * log_on;
        }
        if k < n {
            log_prior += (n - k) as f64 * log_off;
        }
        if !log_prior.is_finite() {
            continue;
        }
        let a_s = dense_a.select_columns(&support);
        // Σ_S = c²σ A_S A_Sᴴ + N₀ I
        let mut cov = DMatrix::<Complex64>::identity(m, m) * Complex64::new(noise_var, 0.0);
        if k > 0 {
            cov += &a_s * a_s.adjoint() * Complex64::new(c * c * sigma, 0.0);
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::Numeric("support covariance is not positive definite".into()))?;
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.re.ln()).sum();
        let alpha = chol.solve(&y);
        let quad = y.dotc(&alpha).re;
        log_weights.push(log_prior - log_det - quad);

        let mut mean = DVector::<Complex64>::zeros(n);
        if k > 0 {
            let local = a_s.adjoint() * &alpha * Complex64::new(c * sigma, 0.0);
            for (slot, &j) in support.iter().enumerate() {
                mean[j] = local[slot];
            }
        }
        means.push(mean);
    }

    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut acc = DVector::<Complex64>::zeros(n);
    for (lw, mean) in log_weights.iter().zip(&means) {
        let w = (lw - max).exp();
        total += w;
        acc += mean * Complex64::new(w, 0.0);
    }
    Ok((acc / Complex64::new(total, 0.0)).iter().copied().collect())
}
