//! Bernoulli-Gaussian GAMP for `y = c·A·v + n`.
//!
//! Sum-product GAMP with an AWGN output channel and the BG input denoiser.
//! The matrix is accessed only through [`LinearOperator`], so the factored
//! sensing blocks of a [`MeasurementLedger`] never need to be densified.

mod denoise;
mod exact;

pub use denoise::denoise_input;
pub use exact::{exact_mmse_oracle, MAX_ENUMERATION_DIM};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::MeasurementLedger;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgPrior {
    /// Probability that a coefficient is active.
    pub rho: f64,
    /// Variance of an active coefficient.
    pub sigma_r: f64,
}

impl BgPrior {
    pub fn new(rho: f64, sigma_r: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Config(format!("activity probability {rho} outside (0, 1]")));
        }
        if !(sigma_r > 0.0) {
            return Err(Error::Config(format!("active variance {sigma_r} must be positive")));
        }
        Ok(Self { rho, sigma_r })
    }

    pub fn mean_variance(&self) -> f64 {
        self.rho * self.sigma_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GampConfig {
    pub max_iterations: usize,
    /// Relative change of the estimate below which iteration stops.
    pub tolerance: f64,
    /// Weight on the fresh update; 1 disables damping.
    pub damping: f64,
    pub variance_floor: f64,
}

impl Default for GampConfig {
    fn default() -> Self {
        Self { max_iterations: 50, tolerance: 1e-6, damping: 0.7, variance_floor: 1e-12 }
    }
}

impl GampConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0) || !(self.variance_floor > 0.0) {
            return Err(Error::Config("tolerance and variance_floor must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping {} outside (0, 1]", self.damping)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualChannelEstimate {
    pub v_hat: Vec<Complex64>,
    pub v_var: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl VirtualChannelEstimate {
    /// The prior-mean estimate, used when nothing has been measured yet.
    pub fn prior_mean(len: usize, prior: &BgPrior) -> Self {
        Self { v_hat: vec![ZERO; len], v_var: vec![prior.mean_variance(); len], iterations_used: 0, converged: false }
    }

    /// Reshapes `v_hat` into the `n_ue × n_bs` beam-domain matrix.
    pub fn to_matrix(&self, n_ue: usize, n_bs: usize) -> DMatrix<Complex64> {
        DMatrix::from_column_slice(n_ue, n_bs, &self.v_hat)
    }
}

/// Matrix-free access to `A` and its elementwise squared magnitude.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A·x`
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);
    /// `out = Aᴴ·z`
    fn apply_adjoint(&self, z: &[Complex64], out: &mut [Complex64]);
    /// `out = |A|²·x`
    fn apply_sq(&self, x: &[f64], out: &mut [f64]);
    /// `out = (|A|²)ᵀ·z`
    fn apply_sq_transpose(&self, z: &[f64], out: &mut [f64]);
}

impl LinearOperator for DMatrix<Complex64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        for (c, xc) in x.iter().enumerate() {
            for (r, o) in out.iter_mut().enumerate() {
                *o += self[(r, c)] * xc;
            }
        }
    }

    fn apply_adjoint(&self, z: &[Complex64], out: &mut [Complex64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.column(c).iter().zip(z).map(|(a, zr)| a.conj() * zr).sum();
        }
    }

    fn apply_sq(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (c, xc) in x.iter().enumerate() {
            for (r, o) in out.iter_mut().enumerate() {
                *o += self[(r, c)].norm_sqr() * xc;
            }
        }
    }

    fn apply_sq_transpose(&self, z: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.column(c).iter().zip(z).map(|(a, zr)| a.norm_sqr() * zr).sum();
        }
    }
}

impl LinearOperator for MeasurementLedger {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let mut row = 0;
        for block in &self.blocks {
            for &q in &block.ue_beams {
                out[row] = block.taps.iter().map(|&(p, s)| s * x[block.position(p, q)]).sum();
                row += 1;
            }
        }
    }

    fn apply_adjoint(&self, z: &[Complex64], out: &mut [Complex64]) {
        out.fill(ZERO);
        let mut row = 0;
        for block in &self.blocks {
            for &q in &block.ue_beams {
                for &(p, s) in &block.taps {
                    out[block.position(p, q)] += s.conj() * z[row];
                }
                row += 1;
            }
        }
    }

    fn apply_sq(&self, x: &[f64], out: &mut [f64]) {
        let mut row = 0;
        for block in &self.blocks {
            for &q in &block.ue_beams {
                out[row] = block.taps.iter().map(|&(p, s)| s.norm_sqr() * x[block.position(p, q)]).sum();
                row += 1;
            }
        }
    }

    fn apply_sq_transpose(&self, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let mut row = 0;
        for block in &self.blocks {
            for &q in &block.ue_beams {
                for &(p, s) in &block.taps {
                    out[block.position(p, q)] += s.norm_sqr() * z[row];
                }
                row += 1;
            }
        }
    }
}

/// Runs BG-GAMP on the stacked system held by `ledger`.
pub fn gamp_estimate(
    ledger: &MeasurementLedger,
    noise_var: f64,
    prior: &BgPrior,
    config: &GampConfig,
) -> Result<VirtualChannelEstimate> {
    if ledger.is_empty() {
        return Err(Error::Config("cannot estimate from an empty ledger".into()));
    }
    gamp_solve(ledger, &ledger.stacked_y, ledger.scale, noise_var, prior, config)
}

/// Runs BG-GAMP on `y = scale·A·v + CN(0, noise_var·I)` for any operator.
pub fn gamp_solve<A: LinearOperator + ?Sized>(
    a: &A,
    y: &[Complex64],
    scale: f64,
    noise_var: f64,
    prior: &BgPrior,
    config: &GampConfig,
) -> Result<VirtualChannelEstimate> {
    config.validate()?;
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::Numeric(format!("noise variance must be positive, got {noise_var}")));
    }
    let (m, n) = (a.nrows(), a.ncols());
    if y.len() != m {
        return Err(Error::Config(format!("y has {} entries, operator has {m} rows", y.len())));
    }
    let c = scale;
    let c2 = scale * scale;
    let floor = config.variance_floor;
    let damp = config.damping;

    let mut x_hat = vec![ZERO; n];
    let mut x_var = vec![prior.mean_variance(); n];
    // Damped copy of x_hat that seeds the pseudo-observations.
    let mut x_bar = x_hat.clone();
    let mut s_hat = vec![ZERO; m];
    let mut s_var = vec![0.0; m];
    let mut p_var_prev = vec![0.0; m];

    let mut p_var = vec![0.0; m];
    let mut z = vec![ZERO; m];
    let mut col_prec = vec![0.0; n];
    let mut back = vec![ZERO; n];

    let mut converged = false;
    let mut iterations = 0;
    for it in 0..config.max_iterations {
        iterations = it + 1;
        let step = if it == 0 { 1.0 } else { damp };

        // Output side.
        a.apply_sq(&x_var, &mut p_var);
        a.apply(&x_hat, &mut z);
        for i in 0..m {
            let vp = (step * c2 * p_var[i] + (1.0 - step) * p_var_prev[i]).max(floor);
            p_var_prev[i] = vp;
            let p_hat = z[i] * c - s_hat[i] * vp;
            let denom = vp + noise_var;
            s_hat[i] = (y[i] - p_hat) / denom * step + s_hat[i] * (1.0 - step);
            s_var[i] = step / denom + (1.0 - step) * s_var[i];
        }
        for (xb, x) in x_bar.iter_mut().zip(&x_hat) {
            *xb = x * step + *xb * (1.0 - step);
        }

        // Input side.
        a.apply_sq_transpose(&s_var, &mut col_prec);
        a.apply_adjoint(&s_hat, &mut back);
        let mut delta_sq = 0.0;
        let mut norm_sq = 0.0;
        for j in 0..n {
            let prec = c2 * col_prec[j];
            let (x_new, v_new) = if prec > 0.0 {
                let r_var = (1.0 / prec).max(floor);
                let r_hat = x_bar[j] + back[j] * (c * r_var);
                denoise::posterior(r_hat, r_var, prior.rho, prior.sigma_r)
            } else {
                // Unobserved coefficient keeps its prior moments.
                (ZERO, prior.mean_variance())
            };
            delta_sq += (x_new - x_hat[j]).norm_sqr();
            norm_sq += x_new.norm_sqr();
            x_hat[j] = x_new;
            x_var[j] = v_new.max(floor);
        }

        if !delta_sq.is_finite() || !norm_sq.is_finite() {
            return Err(Error::EstimatorFailure { iterations });
        }
        if it > 0 && delta_sq <= config.tolerance * config.tolerance * norm_sq.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    if x_hat.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::EstimatorFailure { iterations });
    }
    Ok(VirtualChannelEstimate { v_hat: x_hat, v_var: x_var, iterations_used: iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prior_validation() {
        assert!(BgPrior::new(0.0, 1.0).is_err());
        assert!(BgPrior::new(1.1, 1.0).is_err());
        assert!(BgPrior::new(0.5, 0.0).is_err());
        assert!(BgPrior::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(GampConfig::default().validate().is_ok());
        assert!(GampConfig { damping: 0.0, ..Default::default() }.validate().is_err());
        assert!(GampConfig { tolerance: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn orthonormal_stack_recovers_signal() {
        let n = 32;
        let a = DMatrix::from_fn(n, n, |r, c| {
            Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * std::f64::consts::PI * (r * c) as f64 / n as f64)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth: Vec<Complex64> = (0..n)
            .map(|j| if j % 7 == 0 { crate::array::complex_gaussian(&mut rng, 1.0) } else { ZERO })
            .collect();
        let prior = BgPrior::new(0.15, 1.0).unwrap();
        let y = &a * nalgebra::DVector::from_vec(truth.clone());
        let est = gamp_solve(&a, y.as_slice(), 1.0, 1e-8, &prior, &GampConfig::default()).unwrap();
        let err: f64 = est.v_hat.iter().zip(&truth).map(|(e, t)| (e - t).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = truth.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-3, "relative error {}", err / norm);
    }

    #[test]
    fn deterministic() {
        let a = DMatrix::from_fn(6, 10, |r, c| Complex64::new(((r * 3 + c) % 4) as f64 - 1.5, ((r + c) % 3) as f64 - 1.0));
        let y: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.2)).collect();
        let prior = BgPrior::new(0.2, 1.0).unwrap();
        let one = gamp_solve(&a, &y, 0.5, 0.1, &prior, &GampConfig::default()).unwrap();
        let two = gamp_solve(&a, &y, 0.5, 0.1, &prior, &GampConfig::default()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn rejects_bad_noise_and_shapes() {
        let a = DMatrix::<Complex64>::identity(3, 3);
        let prior = BgPrior::new(0.2, 1.0).unwrap();
        let y = vec![ZERO; 3];
        assert!(matches!(gamp_solve(&a, &y, 1.0, 0.0, &prior, &GampConfig::default()), Err(Error::Numeric(_))));
        assert!(gamp_solve(&a, &y[..2], 1.0, 0.1, &prior, &GampConfig::default()).is_err());
    }
}
