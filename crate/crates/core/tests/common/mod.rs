//! Reference computations written from first principles, sharing nothing
//! with the library beyond plain data types.
#![allow(dead_code)]

use std::f64::consts::PI;

use swift_core::{Complex64, PathParameters};

/// `exp(jπk·cos ε)/√N`.
pub fn steering(eps: f64, n: usize) -> Vec<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    (0..n).map(|k| Complex64::from_polar(norm, PI * k as f64 * eps.cos())).collect()
}

/// Candidate beam `k` of an `n`-element array points at `arccos(−1 + 2k/n)`.
pub fn candidate_beam(k: usize, n: usize) -> Vec<Complex64> {
    steering((-1.0 + 2.0 * k as f64 / n as f64).acos(), n)
}

/// `H[q][p] = √(N_BS·N_UE) Σ α u_UE(θ)_q · conj(u_BS(φ)_p)`.
pub fn channel(paths: &[PathParameters], n_bs: usize, n_ue: usize) -> Vec<Vec<Complex64>> {
    let gain = ((n_bs * n_ue) as f64).sqrt();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n_bs]; n_ue];
    for path in paths {
        let rx = steering(path.aoa, n_ue);
        let tx = steering(path.aod, n_bs);
        for q in 0..n_ue {
            for p in 0..n_bs {
                h[q][p] += path.alpha * gain * rx[q] * tx[p].conj();
            }
        }
    }
    h
}

/// `w_qᴴ H f_p` for candidate beams.
pub fn beam_gain(h: &[Vec<Complex64>], q: usize, p: usize) -> Complex64 {
    let (n_ue, n_bs) = (h.len(), h[0].len());
    let w = candidate_beam(q, n_ue);
    let f = candidate_beam(p, n_bs);
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, wa) in w.iter().enumerate() {
        for (b, fb) in f.iter().enumerate() {
            acc += wa.conj() * h[a][b] * fb;
        }
    }
    acc
}

/// Noiseless sample on UE beam `q`: `√(P/R_BS)·Σ_i s_i·w_qᴴ H f_{p_i}`.
pub fn noiseless_sample(h: &[Vec<Complex64>], q: usize, bs: &[usize], pilots: &[Complex64], power: f64) -> Complex64 {
    let c = (power / bs.len() as f64).sqrt();
    bs.iter().zip(pilots).map(|(&p, s)| beam_gain(h, q, p) * s).sum::<Complex64>() * c
}

/// Posterior mean and variance of `v ~ (1−ρ)δ₀ + ρ·CN(0,σ)` given `r = v + CN(0,τ)`,
/// by the midpoint rule on a square grid.
pub fn bg_posterior_midpoint(r: Complex64, tau: f64, rho: f64, sigma: f64) -> (Complex64, f64) {
    // The active posterior is concentrated within a few sd of its centre.
    let post_var = sigma * tau / (sigma + tau);
    let centre = r * (sigma / (sigma + tau));
    let half = 12.0 * (post_var / 2.0).sqrt();
    let cells = 600;
    let h = 2.0 * half / cells as f64;
    let mut z = 0.0;
    let mut m1 = Complex64::new(0.0, 0.0);
    let mut m2 = 0.0;
    for i in 0..cells {
        for j in 0..cells {
            let v = centre + Complex64::new(-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h);
            // Unnormalised joint density, relative to exp(−|r|²/(σ+τ)).
            let w = (-(v.norm_sqr() / sigma) - (r - v).norm_sqr() / tau + r.norm_sqr() / (sigma + tau)).exp();
            z += w;
            m1 += v * w;
            m2 += v.norm_sqr() * w;
        }
    }
    let cell = h * h;
    // ∫ CN(v;0,σ)CN(r;v,τ) dv = CN(r; 0, σ+τ)
    let active = rho * z * cell / (PI * PI * sigma * tau);
    let spike = (1.0 - rho) * (-r.norm_sqr() / tau + r.norm_sqr() / (sigma + tau)).exp() / (PI * tau);
    let total = active + spike;
    let mean = m1 * (rho * cell / (PI * PI * sigma * tau) / total);
    let second = m2 * rho * cell / (PI * PI * sigma * tau) / total;
    (mean, second - mean.norm_sqr())
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn argmax_abs(v: &[Complex64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.norm() > v[best].norm() {
            best = i;
        }
    }
    best
}
