//! Orthonormal candidate beams built from quantized phase shifters.
//!
//! Column `n` (0-based) steers toward `arccos(−1 + 2n/N)`, which lands every
//! element phase on the `N`-point grid `π(−1 + 2k/N)` when `N` is even. The
//! columns form a (phase-rotated) DFT basis, so the matrix is unitary for any `N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::steering_vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bs,
    Ue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// `N × N`, one candidate beam per column.
    pub matrix: DMatrix<Complex64>,
    pub side: Side,
}

impl Codebook {
    pub fn size(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn column(&self, n: usize) -> nalgebra::DVectorView<'_, Complex64> {
        self.matrix.column(n)
    }

    /// Largest entry-wise deviation of `CᴴC` and `CCᴴ` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.size();
        let id = DMatrix::<Complex64>::identity(n, n);
        let left = self.matrix.adjoint() * &self.matrix - &id;
        let right = &self.matrix * self.matrix.adjoint() - &id;
        left.iter().chain(right.iter()).map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Stacks the selected columns into an `N × k` matrix.
    pub fn select(&self, indices: &[usize]) -> DMatrix<Complex64> {
        self.matrix.select_columns(indices)
    }
}

/// The `N` allowed phase-shifter values `exp(jπ(−1 + 2k/N))/√N`, `k = 0..N`.
pub fn quantized_phase_set(n: usize) -> Vec<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    (0..n).map(|k| Complex64::from_polar(norm, grid_phase(k, n))).collect()
}

/// Phase of the `k`-th grid point, in `[−π, π)`.
pub fn grid_phase(k: usize, n: usize) -> f64 {
    PI * (-1.0 + 2.0 * k as f64 / n as f64)
}

/// Steering angle of candidate beam `k` (0-based), in `[0, π]`.
pub fn grid_angle(k: usize, n: usize) -> f64 {
    (-1.0 + 2.0 * k as f64 / n as f64).clamp(-1.0, 1.0).acos()
}

/// Candidate beam whose main lobe lies closest to `angle`.
///
/// Beam patterns are periodic in `cos ε` with period 2, so distance is taken
/// modulo 2. Ties go to the lower index.
pub fn nearest_beam(angle: f64, n: usize) -> usize {
    let c = angle.cos();
    let dist = |k: usize| {
        let d = (c - (-1.0 + 2.0 * k as f64 / n as f64)).rem_euclid(2.0);
        d.min(2.0 - d)
    };
    (0..n).fold(0, |best, k| if dist(k) < dist(best) { k } else { best })
}

pub fn build_codebook(n: usize, side: Side) -> Codebook {
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for col in 0..n {
        let sv = steering_vector(grid_angle(col, n), n);
        for (row, e) in sv.entries.iter().enumerate() {
            matrix[(row, col)] = *e;
        }
    }
    Codebook { matrix, side }
}

/// BS and UE codebooks for one system configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookPair {
    pub bs: Codebook,
    pub ue: Codebook,
}

impl CodebookPair {
    pub fn new(dims: &crate::array::SystemDims) -> Self {
        Self { bs: build_codebook(dims.n_bs, Side::Bs), ue: build_codebook(dims.n_ue, Side::Ue) }
    }
}
