//! Independent reference computations used by the test suites and `selftest`.
//!
//! None of these share code paths with the implementations they check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::ChannelRealization;
use crate::codebook::CodebookPair;
use crate::measurement::{BeamSelection, PilotSymbols};

/// Posterior mean and variance of a Bernoulli-Gaussian coefficient by
/// trapezoidal quadrature over the complex plane.
///
/// The integration box is the intersection of ±`half_width` standard
/// deviations around the likelihood centre `r` and around the prior centre 0.
pub fn posterior_moments_quadrature(r: Complex64, tau: f64, rho: f64, sigma: f64) -> (Complex64, f64) {
    const HALF_WIDTH: f64 = 10.0;
    const STEPS_PER_STD: f64 = 10.0;
    let (sd_lik, sd_pri) = ((tau / 2.0).sqrt(), (sigma / 2.0).sqrt());
    let h = sd_lik.min(sd_pri) / STEPS_PER_STD;
    let axis = |centre: f64| -> Vec<f64> {
        let lo = (centre - HALF_WIDTH * sd_lik).max(-HALF_WIDTH * sd_pri);
        let hi = (centre + HALF_WIDTH * sd_lik).min(HALF_WIDTH * sd_pri);
        if hi <= lo {
            return Vec::new();
        }
        let n = ((hi - lo) / h).ceil() as usize + 1;
        (0..n).map(|k| lo + k as f64 * h).collect()
    };
    let xs = axis(r.re);
    let ys = axis(r.im);

    // log of CN(v; 0, σ)·CN(r; v, τ) with the 1/(π²στ) factor kept.
    let log_norm = -(std::f64::consts::PI.powi(2) * sigma * tau).ln();
    let mut logs = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let v = Complex64::new(x, y);
            logs.push((v, log_norm - v.norm_sqr() / sigma - (r - v).norm_sqr() / tau));
        }
    }
    let log_spike = (1.0 - rho).ln() - (std::f64::consts::PI * tau).ln() - r.norm_sqr() / tau;
    let shift = logs.iter().map(|(_, l)| *l).fold(log_spike, f64::max);

    let cell = h * h;
    let mut z_active = 0.0;
    let mut first = Complex64::new(0.0, 0.0);
    let mut second = 0.0;
    for (v, l) in &logs {
        let w = (l - shift).exp() * cell;
        z_active += w;
        first += v * w;
        second += v.norm_sqr() * w;
    }
    let z = rho * z_active + if rho < 1.0 { (log_spike - shift).exp() } else { 0.0 };
    let mean = first * (rho / z);
    let var = rho * second / z - mean.norm_sqr();
    (mean, var)
}

/// `(sᵀF_mᵀF_c*) ⊗ (W_mᴴW_c)` evaluated with dense matrix products.
pub fn kronecker_sensing_block(
    bs_sel: &BeamSelection,
    ue_sel: &BeamSelection,
    pilots: &PilotSymbols,
    codebooks: &CodebookPair,
) -> DMatrix<Complex64> {
    let f_m = codebooks.bs.select(&bs_sel.indices);
    let w_m = codebooks.ue.select(&ue_sel.indices);
    let s = DVector::from_column_slice(&pilots.symbols);
    let left = s.transpose() * f_m.transpose() * codebooks.bs.matrix.map(|e| e.conj());
    let right = w_m.adjoint() * &codebooks.ue.matrix;
    left.kronecker(&right)
}

/// Noiseless `√(P/R_BS)·W_mᴴ·H·F_m·s` by dense products.
pub fn noiseless_observation(
    channel: &ChannelRealization,
    bs_sel: &BeamSelection,
    ue_sel: &BeamSelection,
    pilots: &PilotSymbols,
    codebooks: &CodebookPair,
    power: f64,
) -> DVector<Complex64> {
    let f_m = codebooks.bs.select(&bs_sel.indices);
    let w_m = codebooks.ue.select(&ue_sel.indices);
    let s = DVector::from_column_slice(&pilots.symbols);
    w_m.adjoint() * &channel.h * f_m * s * Complex64::new((power / bs_sel.len() as f64).sqrt(), 0.0)
}

/// Relative L2 distance `‖a − b‖/‖b‖`.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}
