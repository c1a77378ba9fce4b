//! Seeded random generators for states, unitaries, and channels.
//!
//! Everything is driven by an explicit [`ChaCha12Rng`] so that randomized
//! searches and test suites are reproducible from a single `u64` seed.

use nalgebra::linalg::QR;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::qcore::{cx, CMat, DensityOperator, Register};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Matrix of iid standard complex Gaussians.
pub fn ginibre(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cx(re, im)
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fixing.
pub fn unitary(rng: &mut ChaCha12Rng, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..d {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Haar-random pure state as a column vector.
pub fn pure_state_vector(rng: &mut ChaCha12Rng, d: usize) -> CMat {
    let g = ginibre(rng, d, 1);
    let n = g.norm();
    g.scale(1.0 / n)
}

/// Full-rank random density matrix GG†/Tr from a square Ginibre G.
pub fn density_matrix(rng: &mut ChaCha12Rng, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.scale(1.0 / tr)
}

pub fn density_operator(rng: &mut ChaCha12Rng, regs: Vec<Register>) -> DensityOperator {
    let d: usize = regs.iter().map(|r| r.dim).product();
    DensityOperator::new(regs, density_matrix(rng, d)).expect("random density matrix is valid")
}

/// Random Kraus list for a CPTP map `d_in → d_out` with `kraus_count`
/// operators, obtained by slicing a Haar-random isometry.
pub fn kraus_list(rng: &mut ChaCha12Rng, d_in: usize, d_out: usize, kraus_count: usize) -> Vec<CMat> {
    let k = kraus_count.max(d_in.div_ceil(d_out));
    let g = ginibre(rng, d_out * k, d_in);
    let qr = QR::new(g);
    let q = qr.q(); // (d_out·k) × d_in isometry
    (0..k)
        .map(|b| {
            CMat::from_fn(d_out, d_in, |i, j| q[(b * d_out + i, j)])
        })
        .collect()
}

/// Random POVM with `m` outcomes from normalized random PSD operators.
pub fn povm(rng: &mut ChaCha12Rng, d: usize, m: usize) -> Vec<CMat> {
    let parts: Vec<CMat> = (0..m)
        .map(|_| {
            let g = ginibre(rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    let total = parts.iter().fold(CMat::zeros(d, d), |acc, p| acc + p);
    let (vals, vecs) = crate::qcore::eig_hermitian_unchecked(&total);
    let mut inv_sqrt = CMat::zeros(d, d);
    for (i, &v) in vals.iter().enumerate() {
        let col = vecs.column(i);
        let w = if v > 1e-12 { 1.0 / v.sqrt() } else { 0.0 };
        inv_sqrt += (&col * col.adjoint()).scale(w);
    }
    parts.into_iter().map(|p| &inv_sqrt * p * &inv_sqrt).collect()
}

/// Random probability vector from iid uniforms.
pub fn prob_vector(rng: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-6).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}
