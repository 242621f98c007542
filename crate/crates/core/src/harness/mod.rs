//! Seeded Monte Carlo sweeps over SNR, coherence time and scheme.

mod config;
mod report;
mod sweep;

pub use config::ExperimentConfig;
pub use report::{aggregate, emit_csv, format_sig, parse_csv, AggregateRow, CSV_HEADER};
pub use sweep::{run_single, run_sweep, snr_to_noise_var, TrialResult, TrialTrace};
