use std::io::Write;

use crate::controller::{Scheme, StopReason};

use super::TrialResult;

pub const CSV_HEADER: &str = "scheme,snr_db,t_c,mean_t_e,mean_r_opt,mean_r_eff,converged_frac,support_acc,n_trials";

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub t_c: usize,
    pub mean_t_e: f64,
    pub mean_r_opt: f64,
    pub mean_r_eff: f64,
    pub converged_frac: f64,
    pub support_acc: f64,
    pub n_trials: usize,
}

/// Per-`(scheme, snr, t_c)` means, grouped in order of first appearance.
///
/// Sums run in input order, so equal inputs give bit-identical rows.
pub fn aggregate(results: &[TrialResult]) -> Vec<AggregateRow> {
    #[derive(Default)]
    struct Acc {
        t_e: f64,
        r_opt: f64,
        r_eff: f64,
        converged: usize,
        correct: usize,
        n: usize,
    }
    let mut keys: Vec<(Scheme, u64, usize)> = Vec::new();
    let mut accs: Vec<Acc> = Vec::new();
    for r in results {
        let key = (r.scheme, r.snr_db.to_bits(), r.t_c);
        let slot = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                accs.push(Acc::default());
                keys.len() - 1
            }
        };
        let a = &mut accs[slot];
        a.t_e += r.t_e as f64;
        a.r_opt += r.r_opt;
        a.r_eff += r.r_eff;
        a.converged += usize::from(r.stop_reason == StopReason::Converged);
        a.correct += usize::from(r.support_correct);
        a.n += 1;
    }
    keys.into_iter()
        .zip(accs)
        .map(|((scheme, snr_bits, t_c), a)| {
            let n = a.n as f64;
            AggregateRow {
                scheme,
                snr_db: f64::from_bits(snr_bits),
                t_c,
                mean_t_e: a.t_e / n,
                mean_r_opt: a.r_opt / n,
                mean_r_eff: a.r_eff / n,
                converged_frac: a.converged as f64 / n,
                support_acc: a.correct as f64 / n,
                n_trials: a.n,
            }
        })
        .collect()
}

/// Formats with `sig` significant digits, plain '.' decimal, trailing zeros trimmed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn emit_csv<W: Write>(rows: &[AggregateRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            format_sig(r.snr_db, 6),
            r.t_c,
            format_sig(r.mean_t_e, 6),
            format_sig(r.mean_r_opt, 6),
            format_sig(r.mean_r_eff, 6),
            format_sig(r.converged_frac, 6),
            format_sig(r.support_acc, 6),
            r.n_trials
        )?;
    }
    out.flush()
}

/// Reads back a file written by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<AggregateRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(format!("expected 9 fields in '{line}'"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("{s}: {e}"));
            let int = |s: &str| s.parse::<usize>().map_err(|e| format!("{s}: {e}"));
            Ok(AggregateRow {
                scheme: f[0].parse().map_err(|e: crate::Error| e.to_string())?,
                snr_db: num(f[1])?,
                t_c: int(f[2])?,
                mean_t_e: num(f[3])?,
                mean_r_opt: num(f[4])?,
                mean_r_eff: num(f[5])?,
                converged_frac: num(f[6])?,
                support_acc: num(f[7])?,
                n_trials: int(f[8])?,
            })
        })
        .collect()
}
