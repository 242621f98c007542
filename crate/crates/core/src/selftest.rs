//! Built-in oracle checks, run by `swift selftest`.
//!
//! Each check compares a production code path against a reference from
//! [`crate::oracle`] or a closed form and reports the worst deviation seen.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{assemble_channel, draw_paths, draw_paths_on_grid, vec_columns, virtual_channel, SystemDims};
use crate::codebook::{build_codebook, grid_phase, CodebookPair, Side};
use crate::controller::{run_exhaustive, run_swift, LinkSetup, StopReason, StoppingConfig};
use crate::error::Result;
use crate::evaluation::{achievable_rate, select_comm_beams};
use crate::gamp::{denoise_input, exact_mmse_oracle, gamp_solve, BgPrior, GampConfig};
use crate::measurement::{draw_pilots, observe, select_beams, sensing_block};
use crate::oracle::{kronecker_sensing_block, noiseless_observation, posterior_moments_quadrature, relative_l2};
use crate::seeds::TrialSeeds;

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<22} {} ({:.2?})", self.name, self.detail, self.elapsed)
    }
}

fn timed(name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> CheckReport {
    let start = Instant::now();
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckReport { name, passed, detail, elapsed: start.elapsed() }
}

/// Runs every check in a fixed order.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        timed("codebook", codebook_check),
        timed("measurement-identity", || measurement_identity(seed, 1000)),
        timed("denoiser-quadrature", denoiser_quadrature),
        timed("exact-mmse", || exact_mmse_agreement(seed, 100)),
        timed("exhaustive-sweep", || exhaustive_recovery(seed, 20)),
        timed("noiseless-swift", || noiseless_swift(seed, 100)),
    ]
}

/// Gram matrices are the identity and every entry sits on the phase grid.
pub fn codebook_check() -> Result<(bool, String)> {
    let mut worst_gram: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    for n in [2usize, 4, 8, 16, 32, 64] {
        for side in [Side::Bs, Side::Ue] {
            let cb = build_codebook(n, side);
            worst_gram = worst_gram.max(cb.unitarity_error());
            for e in cb.matrix.iter() {
                let d = (0..n)
                    .map(|k| {
                        let diff = (e.arg() - grid_phase(k, n)).rem_euclid(std::f64::consts::TAU);
                        diff.min(std::f64::consts::TAU - diff)
                    })
                    .fold(f64::INFINITY, f64::min);
                worst_phase = worst_phase.max(d);
            }
        }
    }
    Ok((
        worst_gram <= 1e-12 && worst_phase <= 1e-9,
        format!("max Gram error {worst_gram:.2e}, max phase offset {worst_phase:.2e} rad"),
    ))
}

/// Noiseless `observe` against the dense Kronecker form of the sensing block.
pub fn measurement_identity(seed: u64, instances: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for dims in [SystemDims::new(8, 4, 2, 2, 1)?, SystemDims::default()] {
        let cbs = CodebookPair::new(&dims);
        let c = (1.0 / dims.r_bs as f64).sqrt();
        for _ in 0..instances {
            let l = rng.random_range(1..=3);
            let channel = assemble_channel(&draw_paths(l, 1.0, &mut rng), &dims)?;
            let v = nalgebra::DVector::from_vec(vec_columns(&virtual_channel(&channel, &cbs.bs, &cbs.ue)?));
            let bs = select_beams(&mut rng, dims.n_bs, dims.r_bs, Side::Bs)?;
            let ue = select_beams(&mut rng, dims.n_ue, dims.r_ue, Side::Ue)?;
            let pilots = draw_pilots(&mut rng, dims.r_bs);
            let record = observe(&channel, &cbs, 1, &bs, &ue, &pilots, 1.0, 0.0, &mut rng);
            let via_kron = kronecker_sensing_block(&bs, &ue, &pilots, &cbs) * &v * Complex64::new(c, 0.0);
            let via_block = sensing_block(&bs, &ue, &pilots, &dims).to_dense() * &v * Complex64::new(c, 0.0);
            let direct = noiseless_observation(&channel, &bs, &ue, &pilots, &cbs, 1.0);
            for i in 0..record.y.len() {
                worst = worst
                    .max((record.y[i] - via_kron[i]).norm())
                    .max((via_block[i] - via_kron[i]).norm())
                    .max((direct[i] - via_kron[i]).norm());
            }
        }
    }
    Ok((worst <= 1e-10, format!("{} instances per size, max abs deviation {worst:.2e}", instances)))
}

/// Bernoulli-Gaussian posterior moments against 2-D quadrature.
pub fn denoiser_quadrature() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for tau in [1e-2f64, 1e-1, 1.0, 10.0] {
        for rho in [0.01, 0.1, 0.5] {
            let prior = BgPrior::new(rho, 1.0)?;
            let span = 3.0 * (1.0 + tau).sqrt();
            for i in 0..7 {
                for j in 0..7 {
                    let r = Complex64::new(span * (i as f64 / 3.0 - 1.0), span * (j as f64 / 3.0 - 1.0));
                    let (mean, var) = denoise_input(r, tau, &prior)?;
                    let (q_mean, q_var) = posterior_moments_quadrature(r, tau, rho, 1.0);
                    worst = worst.max((mean - q_mean).norm()).max((var - q_var).abs());
                    points += 1;
                }
            }
        }
    }
    Ok((worst <= 1e-6, format!("{points} points, max deviation {worst:.2e}")))
}

/// A random `m × n` Gaussian problem with a Bernoulli-Gaussian signal.
pub fn small_instance(rng: &mut ChaCha8Rng, m: usize, n: usize, prior: &BgPrior, snr_db: f64) -> (nalgebra::DMatrix<Complex64>, Vec<Complex64>, f64) {
    let a = nalgebra::DMatrix::from_fn(m, n, |_, _| crate::array::complex_gaussian(rng, 1.0 / m as f64));
    let x: Vec<Complex64> = (0..n)
        .map(|_| if rng.random::<f64>() < prior.rho { crate::array::complex_gaussian(rng, prior.sigma_r) } else { Complex64::new(0.0, 0.0) })
        .collect();
    // Each row sees n entries of variance 1/m, so the mean signal power per row is ρσn/m.
    let noise_var = prior.rho * prior.sigma_r * n as f64 / m as f64 * 10f64.powf(-snr_db / 10.0);
    let clean = &a * nalgebra::DVector::from_vec(x);
    let y = clean.iter().map(|v| v + crate::array::complex_gaussian(rng, noise_var)).collect();
    (a, y, noise_var)
}

/// GAMP within 10% relative L2 of the exact posterior mean on dimension-6 problems
/// observed through 8 Gaussian rows.
pub fn exact_mmse_agreement(seed: u64, instances: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a09_e667);
    let prior = BgPrior::new(1.0 / 3.0, 1.0)?;
    let mut close = 0;
    for _ in 0..instances {
        let (a, y, noise_var) = small_instance(&mut rng, 8, 6, &prior, 20.0);
        let exact = exact_mmse_oracle(&a, &y, 1.0, noise_var, &prior)?;
        if let Ok(est) = gamp_solve(&a, &y, 1.0, noise_var, &prior, &GampConfig::default()) {
            if relative_l2(&est.v_hat, &exact) <= 0.1 {
                close += 1;
            }
        }
    }
    let need = (instances * 9).div_ceil(10);
    Ok((close >= need, format!("{close}/{instances} within 10% (need {need})")))
}

/// Noiseless on-grid sweeps reproduce `H_v` in `N_BS·⌈N_UE/R_UE⌉` slots.
pub fn exhaustive_recovery(seed: u64, trials: usize) -> Result<(bool, String)> {
    let dims = SystemDims::default();
    let cbs = CodebookPair::new(&dims);
    let link = LinkSetup { dims, codebooks: &cbs, power: 1.0, noise_var: 0.0 };
    let mut worst: f64 = 0.0;
    let mut slots_ok = true;
    for t in 0..trials {
        let seeds = TrialSeeds::new(seed.wrapping_add(t as u64));
        let channel = assemble_channel(&draw_paths_on_grid(1, 1.0, &dims, &mut seeds.channel_rng(0)), &dims)?;
        let truth = vec_columns(&virtual_channel(&channel, &cbs.bs, &cbs.ue)?);
        let out = run_exhaustive(&channel, &seeds, &link)?;
        slots_ok &= out.t_e == dims.exhaustive_slots();
        for (e, t) in out.estimate.v_hat.iter().zip(&truth) {
            worst = worst.max((e - t).norm());
        }
    }
    Ok((
        worst <= 1e-9 && slots_ok && dims.exhaustive_slots() == 128,
        format!("max abs error {worst:.2e}, t_e = {}", dims.exhaustive_slots()),
    ))
}

/// Noiseless on-grid SWIFT converges and its beams reach the single-path closed-form rate.
pub fn noiseless_swift(seed: u64, trials: usize) -> Result<(bool, String)> {
    let dims = SystemDims::default();
    let cbs = CodebookPair::new(&dims);
    let link = LinkSetup { dims, codebooks: &cbs, power: 1.0, noise_var: 0.0 };
    let prior = BgPrior::new(1.0 / dims.virtual_len() as f64, 1.0)?;
    let stopping = StoppingConfig::for_dims(&dims, 0.1, 1.0);
    let gamp = GampConfig::default();
    // Rates are evaluated at a nominal 0 dB SNR; the link itself is noiseless.
    let eval_noise = 1.0;
    let mut converged = 0;
    let mut rate_ok = 0;
    for t in 0..trials {
        let seeds = TrialSeeds::new(seed.wrapping_mul(31).wrapping_add(t as u64));
        let paths = draw_paths_on_grid(1, 1.0, &dims, &mut seeds.channel_rng(0));
        let channel = assemble_channel(&paths, &dims)?;
        let out = run_swift(&channel, &seeds, &link, &prior, &stopping, &gamp)?;
        if out.stop_reason != StopReason::Converged {
            continue;
        }
        converged += 1;
        let max_streams = dims.r_bs.min(dims.r_ue);
        let h_hat = out.estimate.to_matrix(dims.n_ue, dims.n_bs);
        let assignment = select_comm_beams(&h_hat, max_streams, stopping.gamma, stopping.threshold_scale);
        let rate = achievable_rate(&channel, &assignment, 1.0, eval_noise, &cbs);
        let closed = (1.0 + dims.virtual_len() as f64 * paths[0].alpha.norm_sqr() / eval_noise).log2();
        if ((rate - closed) / closed).abs() <= 1e-6 {
            rate_ok += 1;
        }
    }
    let need = (trials * 95).div_ceil(100);
    Ok((
        converged >= need && rate_ok == converged,
        format!("converged {converged}/{trials} (need {need}), closed-form rate on {rate_ok}/{converged}"),
    ))
}
