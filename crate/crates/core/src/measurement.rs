//! Random-beam pilot measurements and the stacked sensing system.
//!
//! In each timeslot the BS picks `R_BS` distinct candidate beams and the UE
//! picks `R_UE`. Because candidate beams are orthonormal, the sensing block
//! `(sᵀF_mᵀF_c*) ⊗ (W_mᴴW_c)` has exactly `R_BS` nonzeros per row: row `j`
//! carries pilot `s_i` at vectorized position `p_i·N_UE + q_j`. Blocks are
//! stored in that factored form; [`MeasurementLedger::dense_sensing_matrix`]
//! materializes them when a dense matrix is needed.
//!
//! Beam indices are 0-based throughout.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::array::{complex_gaussian, ChannelRealization, SystemDims};
use crate::codebook::{CodebookPair, Side};
use crate::error::{Error, Result};
use crate::seeds::TrialSeeds;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamSelection {
    pub indices: Vec<usize>,
    pub side: Side,
}

impl BeamSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotSymbols {
    pub symbols: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// 1-based timeslot index.
    pub timeslot: usize,
    pub y: Vec<Complex64>,
    pub bs_selection: BeamSelection,
    pub ue_selection: BeamSelection,
    pub pilots: PilotSymbols,
}

/// Uniform sampling of `r` distinct beams out of `n`.
pub fn select_beams<R: Rng + ?Sized>(rng: &mut R, n: usize, r: usize, side: Side) -> Result<BeamSelection> {
    if r == 0 || r > n {
        return Err(Error::Config(format!("cannot select {r} distinct beams out of {n}")));
    }
    let indices = rand::seq::index::sample(rng, n, r).into_vec();
    Ok(BeamSelection { indices, side })
}

const QPSK: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Independent uniform QPSK symbols, one per BS RF chain.
pub fn draw_pilots<R: Rng + ?Sized>(rng: &mut R, r_bs: usize) -> PilotSymbols {
    let symbols = (0..r_bs).map(|_| QPSK[rng.random_range(0..4)]).collect();
    PilotSymbols { symbols }
}

/// One noisy timeslot: `y = √(P/R_BS)·W_mᴴ·H·F_m·s + n`, `n ~ CN(0, N₀I)`.
#[allow(clippy::too_many_arguments)]
pub fn observe<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    codebooks: &CodebookPair,
    timeslot: usize,
    bs_sel: &BeamSelection,
    ue_sel: &BeamSelection,
    pilots: &PilotSymbols,
    power: f64,
    noise_var: f64,
    rng: &mut R,
) -> MeasurementRecord {
    let scale = (power / bs_sel.len() as f64).sqrt();
    let h = &channel.h;
    let mut x = nalgebra::DVector::<Complex64>::zeros(h.ncols());
    for (p, s) in bs_sel.indices.iter().zip(&pilots.symbols) {
        x.axpy(*s, &codebooks.bs.column(*p), Complex64::new(1.0, 0.0));
    }
    let hx = h * x;
    let y = ue_sel
        .indices
        .iter()
        .map(|&q| {
            let clean = codebooks.ue.column(q).dotc(&hx) * scale;
            clean + complex_gaussian(rng, noise_var)
        })
        .collect();
    MeasurementRecord {
        timeslot,
        y,
        bs_selection: bs_sel.clone(),
        ue_selection: ue_sel.clone(),
        pilots: pilots.clone(),
    }
}

/// Factored `R_UE × (N_BS·N_UE)` sensing block of one timeslot.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingBlock {
    pub n_ue: usize,
    pub n_bs: usize,
    /// Selected receive beam of each row.
    pub ue_beams: Vec<usize>,
    /// `(transmit beam, pilot)` pairs shared by every row.
    pub taps: Vec<(usize, Complex64)>,
}

impl SensingBlock {
    pub fn rows(&self) -> usize {
        self.ue_beams.len()
    }

    pub fn cols(&self) -> usize {
        self.n_bs * self.n_ue
    }

    #[inline]
    pub fn position(&self, tx: usize, rx: usize) -> usize {
        tx * self.n_ue + rx
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut a = DMatrix::zeros(self.rows(), self.cols());
        for (row, &q) in self.ue_beams.iter().enumerate() {
            for &(p, s) in &self.taps {
                a[(row, self.position(p, q))] += s;
            }
        }
        a
    }
}

pub fn sensing_block(
    bs_sel: &BeamSelection,
    ue_sel: &BeamSelection,
    pilots: &PilotSymbols,
    dims: &SystemDims,
) -> SensingBlock {
    SensingBlock {
        n_ue: dims.n_ue,
        n_bs: dims.n_bs,
        ue_beams: ue_sel.indices.clone(),
        taps: bs_sel.indices.iter().copied().zip(pilots.symbols.iter().copied()).collect(),
    }
}

/// All observations of one user so far, plus the stacked sensing system.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementLedger {
    pub dims: SystemDims,
    pub records: Vec<MeasurementRecord>,
    pub blocks: Vec<SensingBlock>,
    pub stacked_y: Vec<Complex64>,
    /// `√(P/R_BS)`.
    pub scale: f64,
}

impl MeasurementLedger {
    pub fn new(dims: SystemDims, power: f64) -> Self {
        Self {
            dims,
            records: Vec::new(),
            blocks: Vec::new(),
            stacked_y: Vec::new(),
            scale: (power / dims.r_bs as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.stacked_y.len()
    }

    pub fn cols(&self) -> usize {
        self.dims.virtual_len()
    }

    pub fn append(&mut self, record: MeasurementRecord) -> Result<()> {
        let expected = self.records.len() + 1;
        if record.timeslot != expected {
            return Err(Error::Protocol(format!(
                "timeslot {} appended where {} was expected",
                record.timeslot, expected
            )));
        }
        if record.y.len() != record.ue_selection.len() {
            return Err(Error::Protocol("observation length differs from receive chains".into()));
        }
        let block = sensing_block(&record.bs_selection, &record.ue_selection, &record.pilots, &self.dims);
        self.stacked_y.extend_from_slice(&record.y);
        self.blocks.push(block);
        self.records.push(record);
        Ok(())
    }

    /// Dense `(m·R_UE) × (N_BS·N_UE)` matrix, without the `√(P/R_BS)` factor.
    pub fn dense_sensing_matrix(&self) -> DMatrix<Complex64> {
        let mut a = DMatrix::zeros(self.rows(), self.cols());
        let mut row0 = 0;
        for block in &self.blocks {
            let d = block.to_dense();
            a.view_mut((row0, 0), (d.nrows(), d.ncols())).copy_from(&d);
            row0 += d.nrows();
        }
        a
    }

    /// Ledger restricted to its first `m` timeslots.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.len());
        let rows: usize = self.records[..m].iter().map(|r| r.y.len()).sum();
        Self {
            dims: self.dims,
            records: self.records[..m].to_vec(),
            blocks: self.blocks[..m].to_vec(),
            stacked_y: self.stacked_y[..rows].to_vec(),
            scale: self.scale,
        }
    }
}

/// Deterministic generator of one user's timeslots from a trial seed.
///
/// The BS stream is regenerated per user, so two users built from the same
/// seed see identical BS beams and pilots in every timeslot.
pub struct MeasurementSession<'a> {
    channel: &'a ChannelRealization,
    codebooks: &'a CodebookPair,
    dims: SystemDims,
    power: f64,
    noise_var: f64,
    bs_rng: rand_chacha::ChaCha8Rng,
    ue_rng: rand_chacha::ChaCha8Rng,
    noise_rng: rand_chacha::ChaCha8Rng,
    next_slot: usize,
}

impl<'a> MeasurementSession<'a> {
    pub fn new(
        channel: &'a ChannelRealization,
        codebooks: &'a CodebookPair,
        dims: SystemDims,
        seeds: &TrialSeeds,
        power: f64,
        noise_var: f64,
    ) -> Self {
        Self {
            channel,
            codebooks,
            dims,
            power,
            noise_var,
            bs_rng: seeds.bs_rng(),
            ue_rng: seeds.ue_rng(channel.user_id),
            noise_rng: seeds.noise_rng(channel.user_id),
            next_slot: 1,
        }
    }

    pub fn next_record(&mut self) -> MeasurementRecord {
        let dims = &self.dims;
        // Selection sizes are validated by SystemDims.
        let bs_sel = select_beams(&mut self.bs_rng, dims.n_bs, dims.r_bs, Side::Bs).expect("valid dims");
        let pilots = draw_pilots(&mut self.bs_rng, dims.r_bs);
        let ue_sel = select_beams(&mut self.ue_rng, dims.n_ue, dims.r_ue, Side::Ue).expect("valid dims");
        let record = observe(
            self.channel,
            self.codebooks,
            self.next_slot,
            &bs_sel,
            &ue_sel,
            &pilots,
            self.power,
            self.noise_var,
            &mut self.noise_rng,
        );
        self.next_slot += 1;
        record
    }
}
