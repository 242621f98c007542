//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swift_core::array::{assemble_channel, complex_gaussian, draw_paths, draw_paths_on_grid, vec_columns, virtual_channel};
use swift_core::codebook::build_codebook;
use swift_core::controller::{run_exhaustive, run_swift};
use swift_core::evaluation::{achievable_rate, select_comm_beams};
use swift_core::gamp::{denoise_input, exact_mmse_oracle, gamp_solve};
use swift_core::harness::{aggregate, emit_csv, run_sweep, AggregateRow};
use swift_core::measurement::{draw_pilots, observe, select_beams, sensing_block};
use swift_core::*;

type Outcome = (bool, String);

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for dims in [SystemDims::new(8, 4, 2, 2, 1).unwrap(), SystemDims::new(32, 16, 8, 4, 1).unwrap()] {
        let cbs = CodebookPair::new(&dims);
        let c = Complex64::new((1.0 / dims.r_bs as f64).sqrt(), 0.0);
        for _ in 0..1000 {
            let paths = draw_paths(rng.random_range(1..=3), 1.0, &mut rng);
            let channel = assemble_channel(&paths, &dims).unwrap();
            let h_ref = common::channel(&paths, dims.n_bs, dims.n_ue);
            let v = DVector::from_vec(vec_columns(&virtual_channel(&channel, &cbs.bs, &cbs.ue).unwrap()));
            let bs = select_beams(&mut rng, dims.n_bs, dims.r_bs, Side::Bs).unwrap();
            let ue = select_beams(&mut rng, dims.n_ue, dims.r_ue, Side::Ue).unwrap();
            let pilots = draw_pilots(&mut rng, dims.r_bs);
            let record = observe(&channel, &cbs, 1, &bs, &ue, &pilots, 1.0, 0.0, &mut rng);
            let stacked = sensing_block(&bs, &ue, &pilots, &dims).to_dense() * &v * c;
            for (j, &q) in ue.indices.iter().enumerate() {
                let direct = common::noiseless_sample(&h_ref, q, &bs.indices, &pilots.symbols, 1.0);
                worst = worst.max((record.y[j] - stacked[j]).norm()).max((direct - stacked[j]).norm());
            }
        }
    }
    (worst <= 1e-10, format!("max abs deviation {worst:.2e} over 2×1000 instances"))
}

fn criterion_2() -> Outcome {
    let mut gram_err: f64 = 0.0;
    let mut phase_err: f64 = 0.0;
    for n in [4usize, 8, 16, 32] {
        for side in [Side::Bs, Side::Ue] {
            let cb = build_codebook(n, side);
            for a in 0..n {
                for b in 0..n {
                    let dot: Complex64 = (0..n).map(|k| cb.matrix[(k, a)].conj() * cb.matrix[(k, b)]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    gram_err = gram_err.max((dot - want).norm());
                }
            }
            let step = 2.0 * PI / n as f64;
            for e in cb.matrix.iter() {
                // Grid points are −π + 2πm/N.
                let offset = (e.arg() + PI).rem_euclid(step);
                phase_err = phase_err.max(offset.min(step - offset));
                assert!((e.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
            }
        }
    }
    (
        gram_err <= 1e-12 && phase_err <= 1e-9,
        format!("max Gram error {gram_err:.2e}, max phase offset {phase_err:.2e} rad"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for tau in [1e-2f64, 1e-1, 1.0, 10.0] {
        for rho in [0.01, 0.1, 0.5] {
            let prior = BgPrior::new(rho, 1.0).unwrap();
            let span = 3.0 * (1.0 + tau).sqrt();
            for i in 0..7 {
                for j in 0..7 {
                    let r = Complex64::new(span * (i as f64 - 3.0) / 3.0, span * (j as f64 - 3.0) / 3.0);
                    let (mean, var) = denoise_input(r, tau, &prior).unwrap();
                    let (q_mean, q_var) = common::bg_posterior_midpoint(r, tau, rho, 1.0);
                    worst = worst.max((mean - q_mean).norm()).max((var - q_var).abs());
                    points += 1;
                }
            }
        }
    }
    (worst <= 1e-6 && points >= 500, format!("{points} points, max deviation {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (m, n, rho) = (8, 6, 1.0 / 3.0);
    let prior = BgPrior::new(rho, 1.0).unwrap();
    let noise_var = rho * n as f64 / m as f64 * 10f64.powf(-2.0);
    let mut close = 0;
    for _ in 0..100 {
        let a = nalgebra::DMatrix::from_fn(m, n, |_, _| complex_gaussian(&mut rng, 1.0 / m as f64));
        let x: Vec<Complex64> = (0..n)
            .map(|_| if rng.random::<f64>() < rho { complex_gaussian(&mut rng, 1.0) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let y: Vec<Complex64> = (&a * DVector::from_vec(x)).iter().map(|v| v + complex_gaussian(&mut rng, noise_var)).collect();
        let exact = exact_mmse_oracle(&a, &y, 1.0, noise_var, &prior).unwrap();
        if let Ok(est) = gamp_solve(&a, &y, 1.0, noise_var, &prior, &GampConfig::default()) {
            if common::rel_l2(&est.v_hat, &exact) <= 0.1 {
                close += 1;
            }
        }
    }
    (close >= 90, format!("{close}/100 within 10% of the exact posterior mean"))
}

fn criterion_5() -> Outcome {
    let dims = SystemDims::default();
    let cbs = CodebookPair::new(&dims);
    let link = LinkSetup { dims, codebooks: &cbs, power: 1.0, noise_var: 0.0 };
    let mut worst: f64 = 0.0;
    let mut t_e_ok = true;
    for t in 0..50u64 {
        let seeds = TrialSeeds::new(500 + t);
        let paths = draw_paths_on_grid(1, 1.0, &dims, &mut seeds.channel_rng(0));
        let channel = assemble_channel(&paths, &dims).unwrap();
        let h_ref = common::channel(&paths, dims.n_bs, dims.n_ue);
        let out = run_exhaustive(&channel, &seeds, &link).unwrap();
        t_e_ok &= out.t_e == 128;
        for p in 0..dims.n_bs {
            for q in 0..dims.n_ue {
                worst = worst.max((out.estimate.v_hat[p * dims.n_ue + q] - common::beam_gain(&h_ref, q, p)).norm());
            }
        }
    }
    (worst <= 1e-9 && t_e_ok, format!("max abs error {worst:.2e}, t_e = 128 on every trial: {t_e_ok}"))
}

fn row(rows: &[AggregateRow], scheme: Scheme, snr: f64, t_c: usize) -> &AggregateRow {
    rows.iter()
        .find(|r| r.scheme == scheme && r.snr_db == snr && r.t_c == t_c)
        .expect("sweep covers every grid point")
}

fn criterion_6(config: &ExperimentConfig, rows: &[AggregateRow]) -> Outcome {
    let t_max = config.t_max as f64;
    let mut ok = true;
    let mut notes = Vec::new();
    for &t_c in &config.t_c_list {
        let curve: Vec<f64> = config.snr_db_list.iter().map(|&s| row(rows, Scheme::Swift, s, t_c).mean_t_e).collect();
        let at = |snr: f64| curve[config.snr_db_list.iter().position(|&s| s == snr).unwrap()];
        let (low, high) = (at(-15.0), at(15.0));
        let rises: Vec<f64> = curve.windows(2).filter(|w| w[1] > w[0]).map(|w| w[1] / w[0] - 1.0).collect();
        let monotone = rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.05);
        ok &= low >= 0.85 * t_max && high <= 0.5 * t_max && monotone;
        let pretty: Vec<String> = curve.iter().map(|t| format!("{t:.1}")).collect();
        notes.push(format!("T_c={t_c}: t_e [{}]", pretty.join(" ")));
    }
    for r in rows {
        let fixed = match r.scheme {
            Scheme::Fnrb(m) => Some(m as f64),
            Scheme::Exhaustive => Some(128.0),
            Scheme::Swift => None,
        };
        if let Some(m) = fixed {
            ok &= r.mean_t_e == m;
        }
    }
    (ok, notes.join("; "))
}

fn criterion_7(config: &ExperimentConfig, rows: &[AggregateRow]) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let others = [Scheme::Fnrb(32), Scheme::Fnrb(64), Scheme::Fnrb(96), Scheme::Fnrb(128), Scheme::Exhaustive];
    for &t_c in &config.t_c_list {
        let r_eff = |scheme, snr| row(rows, scheme, snr, t_c).mean_r_eff;
        let low = r_eff(Scheme::Fnrb(128), -10.0) > r_eff(Scheme::Fnrb(32), -10.0);
        let high = r_eff(Scheme::Fnrb(32), 15.0) > r_eff(Scheme::Fnrb(128), 15.0);
        let mut worst_ratio = f64::INFINITY;
        let mut worst_snr = 0.0;
        for &snr in &config.snr_db_list {
            let best = others.iter().map(|&s| r_eff(s, snr)).fold(f64::NEG_INFINITY, f64::max);
            let ratio = r_eff(Scheme::Swift, snr) / best;
            if ratio < worst_ratio {
                worst_ratio = ratio;
                worst_snr = snr;
            }
        }
        ok &= low && high && worst_ratio >= 0.95;
        notes.push(format!(
            "T_c={t_c}: FNRB(128)>FNRB(32)@-10dB {low}, FNRB(32)>FNRB(128)@15dB {high}, min SWIFT/best {worst_ratio:.3} @ {worst_snr} dB"
        ));
    }
    (ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let dims = SystemDims::default();
    let cbs = CodebookPair::new(&dims);
    let link = LinkSetup { dims, codebooks: &cbs, power: 1.0, noise_var: 0.0 };
    let prior = BgPrior::new(1.0 / dims.virtual_len() as f64, 1.0).unwrap();
    let stopping = StoppingConfig::for_dims(&dims, 0.1, 1.0);
    let eval_noise = 1.0;
    let (mut converged, mut exact_rate) = (0, 0);
    for t in 0..100u64 {
        let seeds = TrialSeeds::new(800 + t);
        let paths = draw_paths_on_grid(1, 1.0, &dims, &mut seeds.channel_rng(0));
        let channel = assemble_channel(&paths, &dims).unwrap();
        let out = run_swift(&channel, &seeds, &link, &prior, &stopping, &GampConfig::default()).unwrap();
        if out.stop_reason != StopReason::Converged {
            continue;
        }
        converged += 1;
        let h_hat = out.estimate.to_matrix(dims.n_ue, dims.n_bs);
        let beams = select_comm_beams(&h_hat, dims.r_bs.min(dims.r_ue), stopping.gamma, stopping.threshold_scale);
        let rate = achievable_rate(&channel, &beams, 1.0, eval_noise, &cbs);
        let closed = (1.0 + dims.virtual_len() as f64 * paths[0].alpha.norm_sqr() / eval_noise).log2();
        if ((rate - closed) / closed).abs() <= 1e-6 {
            exact_rate += 1;
        }
    }
    (
        converged >= 95 && exact_rate == converged,
        format!("converged {converged}/100, closed-form rate reached on {exact_rate}/{converged}"),
    )
}

fn csv_bytes(rows: &[AggregateRow]) -> Vec<u8> {
    let mut out = Vec::new();
    emit_csv(rows, &mut out).unwrap();
    out
}

fn report(n: u32, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let (ok, detail) = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = ok && in_time;
    let verdict = if pass { "PASS" } else { "FAIL" };
    let timing = if in_time { String::new() } else { format!(" [over the {limit:?} budget]") };
    println!("criterion {n} {verdict} {name}: {detail} ({elapsed:.1?}){timing}");
    pass
}

fn main() {
    let config = ExperimentConfig { n_trials: 500, ..Default::default() };

    let mut all = vec![
        report(1, "measurement identity", Duration::from_secs(10), criterion_1),
        report(2, "codebook unitarity and grid", Duration::from_secs(1), criterion_2),
        report(3, "denoiser vs quadrature", Duration::from_secs(30), criterion_3),
        report(4, "GAMP vs exact MMSE", Duration::from_secs(120), criterion_4),
        report(5, "exhaustive baseline", Duration::from_secs(10), criterion_5),
    ];

    let start = Instant::now();
    let rows = aggregate(&run_sweep(&config, 0).expect("sweep runs"));
    let sweep_time = start.elapsed();
    all.push(report(6, "training time vs SNR", Duration::from_secs(20 * 60), || {
        let (ok, detail) = criterion_6(&config, &rows);
        (ok && sweep_time <= Duration::from_secs(20 * 60), format!("{detail}; sweep {sweep_time:.1?}"))
    }));
    all.push(report(7, "effective rate trends", Duration::from_secs(40 * 60), || criterion_7(&config, &rows)));
    all.push(report(8, "noiseless on-grid SWIFT", Duration::from_secs(300), criterion_8));
    all.push(report(9, "reproducible CSV", Duration::from_secs(40 * 60), || {
        let again = aggregate(&run_sweep(&config, 0).expect("sweep runs"));
        let (a, b) = (csv_bytes(&rows), csv_bytes(&again));
        (a == b, format!("{} bytes, identical: {}", a.len(), a == b))
    }));

    let failed = all.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", all.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
