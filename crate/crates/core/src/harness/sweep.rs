use rayon::prelude::*;

use crate::array::{assemble_channel_for_user, draw_paths, draw_paths_on_grid, vec_columns, virtual_channel, ChannelRealization};
use crate::codebook::{nearest_beam, CodebookPair};
use crate::controller::{binarize, run_scheme, EstimationOutcome, LinkSetup, Scheme, StopReason, StoppingConfig};
use crate::error::{Error, Result};
use crate::evaluation::{rate_report, select_comm_beams, BeamAssignment, RateReport};
use crate::gamp::{BgPrior, GampConfig};
use crate::seeds::{derive_seed, TrialSeeds};

use super::ExperimentConfig;

/// `N₀` for unit transmit power.
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub t_c: usize,
    pub user_id: usize,
    pub trial: usize,
    pub t_e: usize,
    pub r_opt: f64,
    pub r_eff: f64,
    pub stop_reason: StopReason,
    pub support_correct: bool,
}

/// Everything produced by one scheme on one user, for the `trial` trace.
#[derive(Debug, Clone)]
pub struct TrialTrace {
    pub result: TrialResult,
    pub outcome: EstimationOutcome,
    pub assignment: BeamAssignment,
    pub report: RateReport,
    pub channel: ChannelRealization,
    pub true_dominant: (usize, usize),
}

struct Context {
    codebooks: CodebookPair,
    prior: BgPrior,
    stopping: StoppingConfig,
    gamp: GampConfig,
}

impl Context {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let dims = config.dims;
        let n = dims.virtual_len() as f64;
        let prior = BgPrior::new((config.l_paths as f64 / n).min(1.0), config.sigma_r)?;
        let stopping = StoppingConfig {
            gamma: config.gamma,
            t_u: config.t_u,
            t_max: config.t_max,
            // Γ·σ_R bounds a path gain; an on-grid path shows up in H_v scaled by the array gain.
            threshold_scale: config.sigma_r * dims.array_gain(),
        };
        stopping.validate()?;
        Ok(Self { codebooks: CodebookPair::new(&dims), prior, stopping, gamp: GampConfig::default() })
    }
}

fn draw_channel(config: &ExperimentConfig, seeds: &TrialSeeds, user: usize) -> Result<ChannelRealization> {
    let mut rng = seeds.channel_rng(user);
    let paths = if config.on_grid {
        draw_paths_on_grid(config.l_paths, config.sigma_r, &config.dims, &mut rng)
    } else {
        draw_paths(config.l_paths, config.sigma_r, &mut rng)
    };
    assemble_channel_for_user(&paths, &config.dims, user)
}

fn argmax_abs(v: &[num_complex::Complex64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x.norm() > best.1 { (i, x.norm()) } else { best })
        .0
}

/// Virtual-channel index of the grid bin nearest the strongest path.
fn nearest_bin(channel: &ChannelRealization, dims: &crate::array::SystemDims) -> usize {
    let strongest = channel
        .paths
        .iter()
        .fold(&channel.paths[0], |best, p| if p.alpha.norm() > best.alpha.norm() { p } else { best });
    nearest_beam(strongest.aod, dims.n_bs) * dims.n_ue + nearest_beam(strongest.aoa, dims.n_ue)
}

fn trial_seeds(config: &ExperimentConfig, snr_idx: usize, tc_idx: usize, trial: usize) -> TrialSeeds {
    TrialSeeds::new(derive_seed(config.master_seed, &[snr_idx as u64, tc_idx as u64, trial as u64]))
}

/// All schemes and users of one `(snr, t_c, trial)` cell, scheme-major within each user.
fn run_cell(config: &ExperimentConfig, ctx: &Context, snr_idx: usize, tc_idx: usize, trial: usize) -> Result<Vec<TrialTrace>> {
    let snr_db = config.snr_db_list[snr_idx];
    let t_c = config.t_c_list[tc_idx];
    let noise_var = snr_to_noise_var(snr_db);
    let seeds = trial_seeds(config, snr_idx, tc_idx, trial);
    let link = LinkSetup { dims: config.dims, codebooks: &ctx.codebooks, power: 1.0, noise_var };
    let max_streams = config.dims.r_bs.min(config.dims.r_ue);
    let n_ue = config.dims.n_ue;

    let mut out = Vec::with_capacity(config.dims.n_users * config.schemes.len());
    for user in 0..config.dims.n_users {
        let channel = draw_channel(config, &seeds, user)?;
        let truth = vec_columns(&virtual_channel(&channel, &ctx.codebooks.bs, &ctx.codebooks.ue)?);
        let true_support = binarize_values(&truth, &ctx.stopping);
        let true_dom = if config.on_grid { argmax_abs(&truth) } else { nearest_bin(&channel, &config.dims) };
        for &scheme in &config.schemes {
            let outcome = run_scheme(scheme, &channel, &seeds, &link, &ctx.prior, &ctx.stopping, &ctx.gamp)?;
            let h_hat = outcome.estimate.to_matrix(n_ue, config.dims.n_bs);
            let assignment = select_comm_beams(&h_hat, max_streams, ctx.stopping.gamma, ctx.stopping.threshold_scale);
            let report = rate_report(&channel, &assignment, 1.0, noise_var, &ctx.codebooks, outcome.t_e, t_c);
            let support_correct = if config.on_grid {
                binarize(&outcome.estimate, ctx.stopping.gamma, ctx.stopping.threshold_scale).bits == true_support
            } else {
                argmax_abs(&outcome.estimate.v_hat) == true_dom
            };
            out.push(TrialTrace {
                result: TrialResult {
                    scheme,
                    snr_db,
                    t_c,
                    user_id: user,
                    trial,
                    t_e: outcome.t_e,
                    r_opt: report.r_opt,
                    r_eff: report.r_eff,
                    stop_reason: outcome.stop_reason,
                    support_correct,
                },
                outcome,
                assignment,
                report,
                channel: channel.clone(),
                true_dominant: (true_dom % n_ue, true_dom / n_ue),
            });
        }
    }
    Ok(out)
}

fn binarize_values(v: &[num_complex::Complex64], stopping: &StoppingConfig) -> Vec<bool> {
    let threshold = stopping.threshold();
    v.iter().map(|x| !(x.norm() < threshold)).collect()
}

/// Runs every `(snr, t_c, trial, user, scheme)` combination.
///
/// Seeds depend only on the `(snr, t_c, trial)` indices, so every scheme sees
/// the same channel and BS randomness, and results do not depend on `workers`
/// or execution order. `workers = 0` uses rayon's default pool.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<Vec<TrialResult>> {
    config.validate()?;
    let ctx = Context::new(config)?;
    let cells: Vec<(usize, usize, usize)> = (0..config.snr_db_list.len())
        .flat_map(|s| (0..config.t_c_list.len()).flat_map(move |t| (0..config.n_trials).map(move |k| (s, t, k))))
        .collect();
    let work = || -> Result<Vec<Vec<TrialTrace>>> {
        cells.par_iter().map(|&(s, t, k)| run_cell(config, &ctx, s, t, k)).collect()
    };
    let traces = if workers == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(work)?
    };
    Ok(traces.into_iter().flatten().map(|t| t.result).collect())
}

/// One `(snr, t_c, trial)` cell with full traces.
pub fn run_single(config: &ExperimentConfig, snr_idx: usize, tc_idx: usize, trial: usize) -> Result<Vec<TrialTrace>> {
    config.validate()?;
    if snr_idx >= config.snr_db_list.len() || tc_idx >= config.t_c_list.len() {
        return Err(Error::Config("snr or t_c index out of range".into()));
    }
    let ctx = Context::new(config)?;
    run_cell(config, &ctx, snr_idx, tc_idx, trial)
}
