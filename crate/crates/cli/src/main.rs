use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swift_core::harness::{aggregate, emit_csv, run_single, run_sweep, TrialTrace};
use swift_core::{selftest, ExperimentConfig};

#[derive(Parser)]
#[command(name = "swift", version, about = "Adaptive random-beam mmWave channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over SNR, coherence time and scheme; writes aggregate CSV.
    Sweep(Overrides),
    /// One seeded trial with a per-checkpoint trace of every scheme.
    Trial {
        #[command(flatten)]
        overrides: Overrides,
        /// Trial index within the (snr, t_c) cell.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Runs the built-in oracle checks.
    Selftest {
        #[arg(long, default_value_t = 2017)]
        seed: u64,
    },
}

/// Command-line values take precedence over the config file.
#[derive(Args)]
struct Overrides {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials per (snr, t_c) point.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated SNR values in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Comma-separated coherence times in symbols.
    #[arg(long)]
    tc: Option<String>,
    /// Comma-separated schemes, e.g. `swift,fnrb(32),exhaustive`.
    #[arg(long)]
    schemes: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl Overrides {
    fn config(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                ExperimentConfig::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let pairs = [
            ("master_seed", self.seed.map(|s| s.to_string())),
            ("n_trials", self.trials.map(|n| n.to_string())),
            ("snr_db_list", self.snr.clone()),
            ("t_c_list", self.tc.clone()),
            ("schemes", self.schemes.clone()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v).map_err(|e| format!("--{}: {e}", flag_name(key)))?;
            }
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn writer(&self) -> Result<Box<dyn Write>, String> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn flag_name(key: &str) -> &str {
    match key {
        "master_seed" => "seed",
        "n_trials" => "trials",
        "snr_db_list" => "snr",
        "t_c_list" => "tc",
        other => other,
    }
}

fn sweep(args: &Overrides) -> Result<(), String> {
    let cfg = args.config()?;
    let results = run_sweep(&cfg, args.workers).map_err(|e| e.to_string())?;
    let mut out = args.writer()?;
    emit_csv(&aggregate(&results), &mut out).and_then(|_| out.flush()).map_err(|e| e.to_string())
}

fn trial(args: &Overrides, index: usize) -> Result<(), String> {
    let cfg = args.config()?;
    let traces = run_single(&cfg, 0, 0, index).map_err(|e| e.to_string())?;
    let mut out = args.writer()?;
    write_trace(&mut out, &cfg, index, &traces).and_then(|_| out.flush()).map_err(|e| e.to_string())
}

fn write_trace(out: &mut dyn Write, cfg: &ExperimentConfig, index: usize, traces: &[TrialTrace]) -> io::Result<()> {
    let d = &cfg.dims;
    writeln!(
        out,
        "trial {index}: seed {}, SNR {} dB, T_c {}, dims {}x{} (R_BS {}, R_UE {}), {} user(s)",
        cfg.master_seed, cfg.snr_db_list[0], cfg.t_c_list[0], d.n_bs, d.n_ue, d.r_bs, d.r_ue, d.n_users
    )?;
    let mut last_user = usize::MAX;
    for t in traces {
        if t.result.user_id != last_user {
            last_user = t.result.user_id;
            writeln!(out, "user {last_user}")?;
            for (l, p) in t.channel.paths.iter().enumerate() {
                writeln!(
                    out,
                    "  path {l}: |alpha| {:.4}, aod {:.4} rad, aoa {:.4} rad",
                    p.alpha.norm(),
                    p.aod,
                    p.aoa
                )?;
            }
            writeln!(out, "  dominant virtual entry (ue {}, bs {})", t.true_dominant.0, t.true_dominant.1)?;
        }
        let r = &t.result;
        writeln!(out, "  {}:", r.scheme)?;
        for cp in &t.outcome.checkpoints {
            let support = cp.support_size.map_or_else(|| "estimator failed".to_string(), |s| format!("support {s}"));
            writeln!(out, "    slot {:>4}: {support}, {} GAMP iterations", cp.timeslot, cp.gamp_iterations)?;
        }
        writeln!(
            out,
            "    stop {:?} at t_e {}; beams bs {:?} ue {:?}; r_opt {:.4}, r_eff {:.4}, feedback {} bits, support correct {}",
            r.stop_reason,
            r.t_e,
            t.assignment.bs_indices,
            t.assignment.ue_indices,
            r.r_opt,
            r.r_eff,
            t.report.feedback_bits,
            r.support_correct
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Trial { overrides, index } => trial(overrides, *index),
        Command::Selftest { seed } => {
            let reports = selftest::run_all(*seed);
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(format!("{failed} of {} checks failed", reports.len()))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
