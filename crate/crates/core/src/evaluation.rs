//! Beam choice from an estimate, and rates scored on the true channel.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::ChannelRealization;
use crate::codebook::CodebookPair;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamAssignment {
    pub bs_indices: Vec<usize>,
    pub ue_indices: Vec<usize>,
}

impl BeamAssignment {
    pub fn streams(&self) -> usize {
        self.bs_indices.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub r_opt: f64,
    pub r_eff: f64,
    pub t_e: usize,
    pub t_c: usize,
    pub feedback_bits: usize,
}

/// Greedy dominant-entry selection on `|Ĥ_v|` (`N_UE × N_BS`).
///
/// Entries are visited by decreasing magnitude; an entry is taken if it is
/// at least `gamma·sigma_r` and shares no row or column with an earlier pick.
/// The largest entry is always taken.
pub fn select_comm_beams(h_v_hat: &DMatrix<Complex64>, max_streams: usize, gamma: f64, sigma_r: f64) -> BeamAssignment {
    let threshold = gamma * sigma_r;
    let n_ue = h_v_hat.nrows();
    let mut order: Vec<(usize, f64)> = h_v_hat.iter().map(|e| e.norm()).enumerate().collect();
    // Ties break toward the lower column-major index.
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut out = BeamAssignment { bs_indices: Vec::new(), ue_indices: Vec::new() };
    for (pos, mag) in order {
        if out.streams() >= max_streams.max(1) {
            break;
        }
        if out.streams() > 0 && mag < threshold {
            break;
        }
        let (row, col) = (pos % n_ue, pos / n_ue);
        if out.ue_indices.contains(&row) || out.bs_indices.contains(&col) {
            continue;
        }
        out.ue_indices.push(row);
        out.bs_indices.push(col);
    }
    out
}

/// `log₂ det(I + P/(N₀·k)·W_dᴴ H F_d F_dᴴ Hᴴ W_d)` with power split over the `k` BS beams.
pub fn achievable_rate(
    true_channel: &ChannelRealization,
    assignment: &BeamAssignment,
    power: f64,
    noise_var: f64,
    codebooks: &CodebookPair,
) -> f64 {
    let k = assignment.bs_indices.len().max(1);
    let f_d = codebooks.bs.select(&assignment.bs_indices);
    let w_d = codebooks.ue.select(&assignment.ue_indices);
    let g = w_d.adjoint() * &true_channel.h * f_d;
    let snr = power / (noise_var * k as f64);
    let n = g.nrows();
    let m = DMatrix::<Complex64>::identity(n, n) + &g * g.adjoint() * Complex64::new(snr, 0.0);
    let rate = match m.clone().cholesky() {
        Some(chol) => chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.re.log2()).sum(),
        None => m.determinant().re.max(1.0).log2(),
    };
    if rate.is_finite() {
        rate.max(0.0)
    } else if rate.is_nan() {
        0.0
    } else {
        rate
    }
}

/// `r_opt·max(0, 1 − t_e/t_c)`.
pub fn effective_rate(r_opt: f64, t_e: usize, t_c: usize) -> f64 {
    assert!(t_c > 0, "coherence time must be positive");
    r_opt * (1.0 - t_e as f64 / t_c as f64).max(0.0)
}

/// `⌈log₂ N_BS⌉` bits per fed-back BS beam.
pub fn feedback_bits(n_bs: usize, paths: usize) -> usize {
    let per_path = if n_bs <= 1 { 0 } else { (usize::BITS - (n_bs - 1).leading_zeros()) as usize };
    per_path * paths
}

pub fn rate_report(
    true_channel: &ChannelRealization,
    assignment: &BeamAssignment,
    power: f64,
    noise_var: f64,
    codebooks: &CodebookPair,
    t_e: usize,
    t_c: usize,
) -> RateReport {
    let r_opt = achievable_rate(true_channel, assignment, power, noise_var, codebooks);
    RateReport {
        r_opt,
        r_eff: effective_rate(r_opt, t_e, t_c),
        t_e,
        t_c,
        feedback_bits: feedback_bits(codebooks.bs.size(), assignment.streams()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{assemble_channel, PathParameters, SystemDims};
    use crate::codebook::grid_angle;

    fn sparse(n_ue: usize, n_bs: usize, entries: &[(usize, usize, f64)]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n_ue, n_bs);
        for &(r, c, v) in entries {
            m[(r, c)] = Complex64::new(v, 0.0);
        }
        m
    }

    #[test]
    fn single_dominant_entry() {
        let a = select_comm_beams(&sparse(16, 32, &[(3, 7, 2.0)]), 4, 0.1, 1.0);
        assert_eq!(a.ue_indices, vec![3]);
        assert_eq!(a.bs_indices, vec![7]);
    }

    #[test]
    fn column_conflict_keeps_one() {
        let a = select_comm_beams(&sparse(4, 4, &[(0, 2, 1.0), (3, 2, 1.0)]), 4, 0.1, 1.0);
        assert_eq!(a.bs_indices, vec![2]);
        assert_eq!(a.ue_indices, vec![0]);
    }

    #[test]
    fn below_threshold_still_picks_one() {
        let a = select_comm_beams(&sparse(4, 4, &[(1, 1, 0.01), (2, 3, 0.005)]), 4, 0.1, 1.0);
        assert_eq!((a.ue_indices, a.bs_indices), (vec![1], vec![1]));
    }

    #[test]
    fn stream_cap() {
        let h = sparse(4, 4, &[(0, 0, 4.0), (1, 1, 3.0), (2, 2, 2.0), (3, 3, 1.0)]);
        assert_eq!(select_comm_beams(&h, 2, 0.1, 1.0).streams(), 2);
    }

    #[test]
    fn effective_rate_examples() {
        assert_eq!(effective_rate(4.0, 100, 200), 2.0);
        assert_eq!(effective_rate(4.0, 0, 200), 4.0);
        assert_eq!(effective_rate(4.0, 200, 200), 0.0);
        assert_eq!(effective_rate(4.0, 300, 200), 0.0);
    }

    #[test]
    fn feedback_bit_count() {
        assert_eq!(feedback_bits(32, 1), 5);
        assert_eq!(feedback_bits(33, 2), 12);
        assert_eq!(feedback_bits(16, 3), 12);
    }

    #[test]
    fn aligned_and_misaligned_rates() {
        let dims = SystemDims::default();
        let cbs = CodebookPair::new(&dims);
        let alpha = Complex64::new(0.6, -0.3);
        let p = PathParameters { alpha, aod: grid_angle(9, 32), aoa: grid_angle(5, 16) };
        let ch = assemble_channel(&[p], &dims).unwrap();
        let (power, n0) = (1.0, 0.5);
        let good = BeamAssignment { bs_indices: vec![9], ue_indices: vec![5] };
        let want = (1.0 + power / n0 * 512.0 * alpha.norm_sqr()).log2();
        assert!((achievable_rate(&ch, &good, power, n0, &cbs) - want).abs() < 1e-9 * want);
        let bad = BeamAssignment { bs_indices: vec![10], ue_indices: vec![5] };
        assert!(achievable_rate(&ch, &bad, power, n0, &cbs).abs() < 1e-12);
        assert!(achievable_rate(&ch, &good, power, 1e300, &cbs) < 1e-290);
    }
}
