//! Uniform linear arrays and the sparse geometric channel model.
//!
//! Element spacing is fixed at half a wavelength, so the phase step between
//! adjacent elements is `π·cos(ε)`.
//!
//! Angles are drawn on `[0, 2π)`. A ULA cannot tell `ε` from `2π − ε`, which
//! is harmless because estimation happens in the beam (virtual) domain.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::codebook::Codebook;
use crate::error::{Error, Result};

/// Antenna and RF-chain counts for one BS and its users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemDims {
    pub n_bs: usize,
    pub n_ue: usize,
    pub r_bs: usize,
    pub r_ue: usize,
    pub n_users: usize,
}

impl SystemDims {
    pub fn new(n_bs: usize, n_ue: usize, r_bs: usize, r_ue: usize, n_users: usize) -> Result<Self> {
        let dims = Self { n_bs, n_ue, r_bs, r_ue, n_users };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bs < 2 || self.n_ue < 2 {
            return Err(Error::Config(format!(
                "arrays need at least 2 elements (n_bs = {}, n_ue = {})",
                self.n_bs, self.n_ue
            )));
        }
        if self.r_bs == 0 || self.r_bs > self.n_bs {
            return Err(Error::Config(format!("r_bs = {} outside 1..={}", self.r_bs, self.n_bs)));
        }
        if self.r_ue == 0 || self.r_ue > self.n_ue {
            return Err(Error::Config(format!("r_ue = {} outside 1..={}", self.r_ue, self.n_ue)));
        }
        if self.n_users == 0 {
            return Err(Error::Config("n_users must be positive".into()));
        }
        Ok(())
    }

    /// Length of the vectorized virtual channel, `N_BS·N_UE`.
    pub fn virtual_len(&self) -> usize {
        self.n_bs * self.n_ue
    }

    /// Timeslots needed for one receive sweep over all UE beams.
    pub fn ue_groups(&self) -> usize {
        self.n_ue.div_ceil(self.r_ue)
    }

    /// Schedule length of the exhaustive sweep, `N_BS·⌈N_UE/R_UE⌉`.
    pub fn exhaustive_slots(&self) -> usize {
        self.n_bs * self.ue_groups()
    }

    /// Beam-domain array gain `√(N_BS·N_UE)`.
    pub fn array_gain(&self) -> f64 {
        (self.virtual_len() as f64).sqrt()
    }
}

impl Default for SystemDims {
    fn default() -> Self {
        Self { n_bs: 32, n_ue: 16, r_bs: 8, r_ue: 4, n_users: 1 }
    }
}

/// One propagation path: complex gain plus departure/arrival angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParameters {
    pub alpha: Complex64,
    /// Angle of departure at the BS, radians in `[0, 2π)`.
    pub aod: f64,
    /// Angle of arrival at the UE, radians in `[0, 2π)`.
    pub aoa: f64,
}

/// A channel matrix together with the paths that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N_UE × N_BS`.
    pub h: DMatrix<Complex64>,
    pub paths: Vec<PathParameters>,
    pub user_id: usize,
}

impl ChannelRealization {
    pub fn n_ue(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_bs(&self) -> usize {
        self.h.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub angle: f64,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dvector(&self) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(&self.entries)
    }
}

/// ULA response `u(ε, N)`: entry `k` is `exp(jπk·cos ε)/√N`.
pub fn steering_vector(epsilon: f64, n_elements: usize) -> SteeringVector {
    let norm = 1.0 / (n_elements as f64).sqrt();
    let step = PI * epsilon.cos();
    let entries = (0..n_elements)
        .map(|k| Complex64::from_polar(norm, step * k as f64))
        .collect();
    SteeringVector { entries, angle: epsilon }
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Draws `n_paths` paths with uniform angles and `CN(0, sigma_r)` gains.
pub fn draw_paths<R: Rng + ?Sized>(n_paths: usize, sigma_r: f64, rng: &mut R) -> Vec<PathParameters> {
    (0..n_paths)
        .map(|_| {
            let alpha = complex_gaussian(rng, sigma_r);
            let aod = rng.random_range(0.0..TAU);
            let aoa = rng.random_range(0.0..TAU);
            PathParameters { alpha, aod, aoa }
        })
        .collect()
}

/// Like [`draw_paths`] but with both angles snapped to codebook beam angles.
pub fn draw_paths_on_grid<R: Rng + ?Sized>(
    n_paths: usize,
    sigma_r: f64,
    dims: &SystemDims,
    rng: &mut R,
) -> Vec<PathParameters> {
    (0..n_paths)
        .map(|_| {
            let alpha = complex_gaussian(rng, sigma_r);
            let bs_beam = rng.random_range(0..dims.n_bs);
            let ue_beam = rng.random_range(0..dims.n_ue);
            PathParameters {
                alpha,
                aod: crate::codebook::grid_angle(bs_beam, dims.n_bs),
                aoa: crate::codebook::grid_angle(ue_beam, dims.n_ue),
            }
        })
        .collect()
}

/// `H = √(N_BS·N_UE) Σ_l α_l u(θ_l, N_UE) u(φ_l, N_BS)ᴴ`.
pub fn assemble_channel(paths: &[PathParameters], dims: &SystemDims) -> Result<ChannelRealization> {
    assemble_channel_for_user(paths, dims, 0)
}

pub fn assemble_channel_for_user(
    paths: &[PathParameters],
    dims: &SystemDims,
    user_id: usize,
) -> Result<ChannelRealization> {
    if paths.is_empty() {
        return Err(Error::Config("channel needs at least one path".into()));
    }
    let gain = dims.array_gain();
    let mut h = DMatrix::<Complex64>::zeros(dims.n_ue, dims.n_bs);
    for path in paths {
        let rx = steering_vector(path.aoa, dims.n_ue);
        let tx = steering_vector(path.aod, dims.n_bs);
        let scale = path.alpha * gain;
        for (c, t) in tx.entries.iter().enumerate() {
            let tc = scale * t.conj();
            for (r, x) in rx.entries.iter().enumerate() {
                h[(r, c)] += x * tc;
            }
        }
    }
    Ok(ChannelRealization { h, paths: paths.to_vec(), user_id })
}

/// Beam-domain channel `W_cᴴ·H·F_c`.
pub fn virtual_channel(
    channel: &ChannelRealization,
    bs_codebook: &Codebook,
    ue_codebook: &Codebook,
) -> Result<DMatrix<Complex64>> {
    if bs_codebook.size() != channel.n_bs() || ue_codebook.size() != channel.n_ue() {
        return Err(Error::Config(format!(
            "codebook sizes ({}, {}) do not match channel {}x{}",
            ue_codebook.size(),
            bs_codebook.size(),
            channel.n_ue(),
            channel.n_bs()
        )));
    }
    Ok(ue_codebook.matrix.adjoint() * &channel.h * &bs_codebook.matrix)
}

/// Inverse of [`virtual_channel`]: `W_c·H_v·F_cᴴ`.
pub fn channel_from_virtual(
    h_v: &DMatrix<Complex64>,
    bs_codebook: &Codebook,
    ue_codebook: &Codebook,
) -> DMatrix<Complex64> {
    &ue_codebook.matrix * h_v * bs_codebook.matrix.adjoint()
}

/// Column-stacking vectorization.
pub fn vec_columns(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    // nalgebra storage is column-major, so the raw slice is already vec(M).
    m.as_slice().to_vec()
}

pub fn unvec_columns(v: &[Complex64], nrows: usize, ncols: usize) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(nrows, ncols, v)
}
