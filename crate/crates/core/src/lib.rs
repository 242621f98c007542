//! Adaptive random-beam channel estimation for multi-user mmWave MIMO.
//!
//! The BS broadcasts pilots through random subsets of orthonormal candidate
//! beams; each user listens through its own random receive beams and runs a
//! Bernoulli-Gaussian GAMP estimator on everything collected so far. A user
//! stops once its estimated beam-domain support is stable, so training time
//! adapts to each link. Fixed-budget and exhaustive-sweep baselines share the
//! same measurement model.
//!
//! Modules, bottom up: [`array`] and [`codebook`] (channel and beams),
//! [`measurement`] (pilot timeslots and the sensing system), [`gamp`]
//! (estimator), [`controller`] (stopping rule and baselines), [`evaluation`]
//! (beam choice and rates), [`harness`] (Monte Carlo sweeps and CSV).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod codebook;
pub mod controller;
mod error;
pub mod evaluation;
pub mod gamp;
pub mod harness;
pub mod measurement;
pub mod oracle;
pub mod seeds;
pub mod selftest;

pub use array::{ChannelRealization, PathParameters, SteeringVector, SystemDims};
pub use codebook::{Codebook, CodebookPair, Side};
pub use controller::{EstimationOutcome, LinkSetup, Scheme, StopReason, StoppingConfig};
pub use error::{Error, Result};
pub use evaluation::{BeamAssignment, RateReport};
pub use gamp::{BgPrior, GampConfig, VirtualChannelEstimate};
pub use harness::{AggregateRow, ExperimentConfig, TrialResult};
pub use measurement::{BeamSelection, MeasurementLedger, MeasurementRecord, PilotSymbols};
pub use seeds::TrialSeeds;

pub use num_complex::Complex64;
