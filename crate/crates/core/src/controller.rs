//! Per-user estimation schemes.
//!
//! SWIFT keeps measuring with random beams and re-runs the estimator every
//! `t_u` timeslots. It stops once two successive binarized supports agree and
//! are non-empty, or when `t_max` timeslots have been spent. The fixed-budget
//! (FNRB) and exhaustive-sweep baselines use the same measurement model and
//! seed streams.

use num_complex::Complex64;

use crate::array::{ChannelRealization, SystemDims};
use crate::codebook::{CodebookPair, Side};
use crate::error::{Error, Result};
use crate::gamp::{gamp_estimate, BgPrior, GampConfig, VirtualChannelEstimate};
use crate::measurement::{draw_pilots, observe, BeamSelection, MeasurementLedger, MeasurementSession};
use crate::seeds::TrialSeeds;

/// Smallest noise variance handed to the estimator when the link is noiseless.
pub const ESTIMATOR_NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    /// Binarization threshold relative to `threshold_scale`.
    pub gamma: f64,
    /// Timeslots between estimator runs.
    pub t_u: usize,
    /// Hard cap on timeslots.
    pub t_max: usize,
    /// Magnitude that `gamma` is measured against; entries below
    /// `gamma·threshold_scale` count as absent.
    pub threshold_scale: f64,
}

impl StoppingConfig {
    /// Defaults for `dims`: `t_u = ⌈N_UE/R_UE⌉`, `t_max = N_BS·⌈N_UE/R_UE⌉`,
    /// and the threshold expressed in path-gain units.
    pub fn for_dims(dims: &SystemDims, gamma: f64, path_variance: f64) -> Self {
        Self {
            gamma,
            t_u: dims.ue_groups(),
            t_max: dims.exhaustive_slots(),
            threshold_scale: path_variance * dims.array_gain(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if self.t_u == 0 || self.t_max < self.t_u {
            return Err(Error::Config(format!("need 1 <= t_u <= t_max, got t_u = {}, t_max = {}", self.t_u, self.t_max)));
        }
        if !(self.threshold_scale > 0.0) {
            return Err(Error::Config("threshold_scale must be positive".into()));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.gamma * self.threshold_scale
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinarizedSupport {
    pub bits: Vec<bool>,
}

impl BinarizedSupport {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter_map(|(i, b)| b.then_some(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Converged,
    MaxMeasurements,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Swift,
    Fnrb(usize),
    Exhaustive,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Swift => write!(f, "swift"),
            Scheme::Fnrb(m) => write!(f, "fnrb({m})"),
            Scheme::Exhaustive => write!(f, "exhaustive"),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "swift" => return Ok(Scheme::Swift),
            "exhaustive" => return Ok(Scheme::Exhaustive),
            _ => {}
        }
        let budget = t
            .strip_prefix("fnrb(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("fnrb:"))
            .ok_or_else(|| Error::Config(format!("unknown scheme '{}'", s.trim())))?;
        match budget.trim().parse::<usize>() {
            Ok(m) if m > 0 => Ok(Scheme::Fnrb(m)),
            _ => Err(Error::Config(format!("invalid FNRB budget in '{}'", s.trim()))),
        }
    }
}

/// One SWIFT estimator checkpoint, kept for tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub timeslot: usize,
    /// `None` when the estimator failed and the checkpoint was skipped.
    pub support_size: Option<usize>,
    pub gamp_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOutcome {
    pub estimate: VirtualChannelEstimate,
    /// Timeslots (= symbols) spent measuring.
    pub t_e: usize,
    pub stop_reason: StopReason,
    pub scheme: Scheme,
    pub checkpoints: Vec<Checkpoint>,
}

/// Everything about the link that every scheme needs.
#[derive(Debug, Clone, Copy)]
pub struct LinkSetup<'a> {
    pub dims: SystemDims,
    pub codebooks: &'a CodebookPair,
    pub power: f64,
    pub noise_var: f64,
}

impl LinkSetup<'_> {
    fn estimator_noise(&self) -> f64 {
        self.noise_var.max(ESTIMATOR_NOISE_FLOOR)
    }
}

/// Bit `i` is clear iff `|v̂_i| < gamma·scale`.
pub fn binarize(estimate: &VirtualChannelEstimate, gamma: f64, scale: f64) -> BinarizedSupport {
    let threshold = gamma * scale;
    BinarizedSupport { bits: estimate.v_hat.iter().map(|v| !(v.norm() < threshold)).collect() }
}

/// Supports agree and at least one coefficient is present.
pub fn has_converged(current: &BinarizedSupport, previous: &BinarizedSupport) -> Result<bool> {
    if current.bits.len() != previous.bits.len() {
        return Err(Error::Logic(format!(
            "support lengths differ: {} vs {}",
            current.bits.len(),
            previous.bits.len()
        )));
    }
    Ok(current.bits == previous.bits && current.bits.iter().any(|b| *b))
}

pub fn run_swift(
    channel: &ChannelRealization,
    seeds: &TrialSeeds,
    link: &LinkSetup<'_>,
    prior: &BgPrior,
    stopping: &StoppingConfig,
    gamp: &GampConfig,
) -> Result<EstimationOutcome> {
    stopping.validate()?;
    let mut session = MeasurementSession::new(channel, link.codebooks, link.dims, seeds, link.power, link.noise_var);
    let mut ledger = MeasurementLedger::new(link.dims, link.power);
    let mut previous: Option<BinarizedSupport> = None;
    let mut latest: Option<VirtualChannelEstimate> = None;
    let mut checkpoints = Vec::new();

    for m in 1..=stopping.t_max {
        ledger.append(session.next_record())?;
        let at_checkpoint = m % stopping.t_u == 0;
        if !at_checkpoint && m != stopping.t_max {
            continue;
        }
        match gamp_estimate(&ledger, link.estimator_noise(), prior, gamp) {
            Ok(est) => {
                let support = binarize(&est, stopping.gamma, stopping.threshold_scale);
                checkpoints.push(Checkpoint {
                    timeslot: m,
                    support_size: Some(support.count()),
                    gamp_iterations: est.iterations_used,
                });
                let done = at_checkpoint
                    && match &previous {
                        Some(prev) => has_converged(&support, prev)?,
                        None => false,
                    };
                latest = Some(est);
                if done {
                    return Ok(EstimationOutcome {
                        estimate: latest.take().expect("estimate just stored"),
                        t_e: m,
                        stop_reason: StopReason::Converged,
                        scheme: Scheme::Swift,
                        checkpoints,
                    });
                }
                if at_checkpoint {
                    previous = Some(support);
                }
            }
            Err(Error::EstimatorFailure { iterations }) => {
                checkpoints.push(Checkpoint { timeslot: m, support_size: None, gamp_iterations: iterations });
            }
            Err(e) => return Err(e),
        }
    }

    let estimate = latest.unwrap_or_else(|| VirtualChannelEstimate::prior_mean(link.dims.virtual_len(), prior));
    Ok(EstimationOutcome {
        estimate,
        t_e: stopping.t_max,
        stop_reason: StopReason::MaxMeasurements,
        scheme: Scheme::Swift,
        checkpoints,
    })
}

pub fn run_fnrb(
    channel: &ChannelRealization,
    seeds: &TrialSeeds,
    link: &LinkSetup<'_>,
    prior: &BgPrior,
    m_fixed: usize,
    gamp: &GampConfig,
) -> Result<EstimationOutcome> {
    if m_fixed == 0 {
        return Err(Error::Config("FNRB budget must be positive".into()));
    }
    let mut session = MeasurementSession::new(channel, link.codebooks, link.dims, seeds, link.power, link.noise_var);
    let mut ledger = MeasurementLedger::new(link.dims, link.power);
    for _ in 0..m_fixed {
        ledger.append(session.next_record())?;
    }
    let (estimate, checkpoint) = match gamp_estimate(&ledger, link.estimator_noise(), prior, gamp) {
        Ok(est) => {
            let cp = Checkpoint { timeslot: m_fixed, support_size: None, gamp_iterations: est.iterations_used };
            (est, cp)
        }
        Err(Error::EstimatorFailure { iterations }) => (
            VirtualChannelEstimate::prior_mean(link.dims.virtual_len(), prior),
            Checkpoint { timeslot: m_fixed, support_size: None, gamp_iterations: iterations },
        ),
        Err(e) => return Err(e),
    };
    Ok(EstimationOutcome {
        estimate,
        t_e: m_fixed,
        stop_reason: StopReason::MaxMeasurements,
        scheme: Scheme::Fnrb(m_fixed),
        checkpoints: vec![checkpoint],
    })
}

/// Beam sweep: the BS holds one beam at full power while the UE steps through
/// disjoint groups of `R_UE` receive beams, one timeslot per group.
pub fn run_exhaustive(channel: &ChannelRealization, seeds: &TrialSeeds, link: &LinkSetup<'_>) -> Result<EstimationOutcome> {
    let dims = link.dims;
    let mut bs_rng = seeds.bs_rng();
    let mut noise_rng = seeds.noise_rng(channel.user_id);
    let amplitude = link.power.sqrt();
    let mut v_hat = vec![Complex64::new(0.0, 0.0); dims.virtual_len()];
    let mut timeslot = 0;
    for tx in 0..dims.n_bs {
        let bs_sel = BeamSelection { indices: vec![tx], side: Side::Bs };
        for group in 0..dims.ue_groups() {
            timeslot += 1;
            let first = group * dims.r_ue;
            let rx: Vec<usize> = (first..(first + dims.r_ue).min(dims.n_ue)).collect();
            let ue_sel = BeamSelection { indices: rx, side: Side::Ue };
            let pilots = draw_pilots(&mut bs_rng, 1);
            let pilot = pilots.symbols[0];
            let record = observe(
                channel,
                link.codebooks,
                timeslot,
                &bs_sel,
                &ue_sel,
                &pilots,
                link.power,
                link.noise_var,
                &mut noise_rng,
            );
            for (&q, y) in ue_sel.indices.iter().zip(&record.y) {
                v_hat[tx * dims.n_ue + q] = y / (pilot * amplitude);
            }
        }
    }
    let per_entry = if link.power > 0.0 { link.noise_var / link.power } else { f64::INFINITY };
    Ok(EstimationOutcome {
        estimate: VirtualChannelEstimate {
            v_var: vec![per_entry; v_hat.len()],
            v_hat,
            iterations_used: 0,
            converged: true,
        },
        t_e: timeslot,
        stop_reason: StopReason::MaxMeasurements,
        scheme: Scheme::Exhaustive,
        checkpoints: Vec::new(),
    })
}

/// Dispatches to the scheme's runner.
pub fn run_scheme(
    scheme: Scheme,
    channel: &ChannelRealization,
    seeds: &TrialSeeds,
    link: &LinkSetup<'_>,
    prior: &BgPrior,
    stopping: &StoppingConfig,
    gamp: &GampConfig,
) -> Result<EstimationOutcome> {
    match scheme {
        Scheme::Swift => run_swift(channel, seeds, link, prior, stopping, gamp),
        Scheme::Fnrb(m) => run_fnrb(channel, seeds, link, prior, m, gamp),
        Scheme::Exhaustive => run_exhaustive(channel, seeds, link),
    }
}
