//! Seeded random ensembles: Wishart states, Haar unitaries, GUE matrices and perturbative families.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numeric::{diag_real, eig_hermitian, hermitian_part, CMat, CVec, C64};
use crate::states::DensityMatrix;

/// Deterministic generator used by every ensemble in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Real matrix with i.i.d. standard Gaussian entries.
pub fn real_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random complex unit vector.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    let v = ginibre(rng, dim, 1).column(0).into_owned();
    let n = v.norm();
    v.unscale(n)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let qr = ginibre(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed real orthogonal matrix.
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let qr = real_gaussian(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Gaussian unitary ensemble draw `(G + G†)/2`.
pub fn gue<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    hermitian_part(&ginibre(rng, dim, dim))
}

/// Normalized Wishart state `GG†/Tr GG†` with `G` of shape `dim × rank`.
pub fn wishart_state<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    DensityMatrix::from_unnormalized(&g * g.adjoint()).expect("Wishart draw is PSD")
}

/// Full-rank state whose smallest eigenvalue is at least `min_eig`.
///
/// A Wishart draw is mixed with the maximally mixed state just enough to lift the floor.
pub fn full_rank_state<R: Rng + ?Sized>(rng: &mut R, dim: usize, min_eig: f64) -> DensityMatrix {
    let w = wishart_state(rng, dim, dim);
    let lo = w.eigenvalues()[0];
    let target = min_eig.min(0.5 / dim as f64);
    if lo >= target {
        return w;
    }
    // (1−x)·lo + x/d = target.
    let x = (target - lo) / (1.0 / dim as f64 - lo);
    let m = w.matrix().scale(1.0 - x) + CMat::identity(dim, dim).scale(x / dim as f64);
    DensityMatrix::new(m).expect("convex mixture of states")
}

/// Hilbert–Schmidt random mixed state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    wishart_state(rng, dim, dim)
}

/// Random pure state.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    DensityMatrix::pure(&random_vector(rng, dim)).expect("unit vector")
}

/// Traceless Hermitian direction with operator norm `scale`.
pub fn traceless_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> CMat {
    let h = gue(rng, dim);
    let shift = h.trace() / C64::new(dim as f64, 0.0);
    let t = h - CMat::identity(dim, dim) * shift;
    let spec = eig_hermitian(&t).expect("Hermitian by construction");
    let norm = spec.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if norm == 0.0 {
        return t;
    }
    t.scale(scale / norm)
}

/// Traceless direction commuting with σ: a random traceless diagonal in σ's eigenbasis.
pub fn commuting_direction<R: Rng + ?Sized>(rng: &mut R, sigma: &DensityMatrix, scale: f64) -> CMat {
    let d = sigma.dim();
    let mut vals: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
    let mean = vals.iter().sum::<f64>() / d as f64;
    vals.iter_mut().for_each(|x| *x -= mean);
    let norm = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if norm > 0.0 {
        vals.iter_mut().for_each(|x| *x *= scale / norm);
    }
    let u = &sigma.spectral().eigenvectors;
    u * diag_real(&vals) * u.adjoint()
}

/// Random probability vector of length `dim`, bounded below by `floor`.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, dim: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    let slack = 1.0 - floor * dim as f64;
    raw.iter().map(|x| floor + slack * x / s).collect()
}
