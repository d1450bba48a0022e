//! n-copy tests: the optimal acceptance subspace, the likelihood ratio test,
//! the symmetric positive-part test and an independent-measurement baseline.
//!
//! Every n-copy operator lives in the product eigenbasis of σ. Three exact
//! representations are used:
//!
//! * `Types`: a set of accepted multiset types (occurrence counts of each
//!   single-copy label). Used whenever the projector is diagonal in the
//!   product basis, i.e. the likelihood ratio test and commuting pairs.
//! * `Spin`: for qubits, the permutation symmetry of both `ρ^{⊗n}` and
//!   `σ^{⊗n}` splits the space into spin-J blocks of size `2J + 1` with
//!   multiplicity `C(n, n/2 − J) − C(n, n/2 − J − 1)`. Each ξ vector of a
//!   fixed weight type lies in one block, so the projector is a small
//!   matrix per block.
//! * `Dense`: an orthonormal basis of the subspace as columns over all `dⁿ`
//!   labels, for generic small cases.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::{relative_entropy, relative_entropy_variance};
use crate::error::{invalid, QhtError, Result};
use crate::numeric::{
    binomial, eig_hermitian, fix_phases, hermitian_part, normal_quantile, orthonormal_span, span_above,
    singular_values, CMat, CVec, C64, LOG_FLOOR,
};
use crate::states::{Budget, DensityMatrix, TensorBasisLabel};

/// Relative slack applied to acceptance inequalities so that exact ties are accepted.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Largest product dimension for the dense optimal construction.
pub const DENSE_OPTIMAL_CAP: usize = 1024;

/// Largest product dimension for dense diagonalization in symmetric testing.
pub const DENSE_SYMMETRIC_CAP: usize = 4096;

/// Which exponent the threshold targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `S(ρ‖σ)` and `V(ρ‖σ)`: the optimal measurement.
    Optimal,
    /// `S(ρ_D‖σ)` and `V(ρ_D‖σ)`: the likelihood ratio test.
    Classical,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Optimal => "optimal",
            Mode::Classical => "classical",
        })
    }
}

/// Per-copy threshold `𝓔` together with the data that produced it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AcceptanceThreshold {
    pub value: f64,
    pub epsilon: f64,
    pub n: usize,
    pub mode: Mode,
}

/// Type-I and type-II error probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorPair {
    pub alpha: f64,
    pub beta: f64,
}

/// One permutation-symmetry block of a qubit n-copy operator.
#[derive(Clone, Debug)]
pub struct SpinBlock {
    /// Twice the spin, i.e. block size minus one.
    pub two_j: usize,
    /// Hamming weight of the first basis vector in the block.
    pub offset: usize,
    pub multiplicity: f64,
    /// Projector on the `(2J+1)`-dimensional block, in the weight basis.
    pub projector: CMat,
    pub rank: usize,
}

/// Exact representation of an acceptance subspace.
#[derive(Clone, Debug)]
pub enum Acceptance {
    Types { accepted: Vec<Vec<u32>> },
    Spin { blocks: Vec<SpinBlock> },
    Dense { basis: CMat },
}

/// Projector `A⁽ⁿ⁾` onto an acceptance subspace of `(ℂ^d)^{⊗n}`.
#[derive(Clone, Debug)]
pub struct NCopyProjector {
    pub n: usize,
    pub d: usize,
    pub acceptance: Acceptance,
    pub rank: usize,
}

impl NCopyProjector {
    /// The whole space.
    pub fn full(d: usize, n: usize) -> Self {
        let accepted = compositions(n, d);
        let rank = (d as f64).powi(n as i32).round() as usize;
        Self {
            n,
            d,
            acceptance: Acceptance::Types { accepted },
            rank,
        }
    }

    /// The zero projector.
    pub fn empty(d: usize, n: usize) -> Self {
        Self {
            n,
            d,
            acceptance: Acceptance::Types { accepted: vec![] },
            rank: 0,
        }
    }

    pub fn total_dim(&self) -> usize {
        (self.d as f64).powi(self.n as i32).round() as usize
    }

    /// Sorted lexicographic positions of the accepted product labels, when the
    /// projector is diagonal in the σ product basis.
    pub fn accepted_labels(&self) -> Option<Vec<usize>> {
        match &self.acceptance {
            Acceptance::Types { accepted } => {
                let set: HashSet<&Vec<u32>> = accepted.iter().collect();
                Some(
                    (0..self.total_dim())
                        .filter(|&pos| {
                            let label = TensorBasisLabel::from_position(pos, self.d, self.n);
                            set.contains(&type_of(&label.indices, self.d))
                        })
                        .collect(),
                )
            }
            Acceptance::Spin { blocks } => {
                let mut weight_state: Vec<Option<bool>> = vec![None; self.n + 1];
                for b in blocks {
                    for k in 0..=b.two_j {
                        let p = b.projector[(k, k)].re;
                        let on = if (p - 1.0).abs() < 1e-9 {
                            true
                        } else if p.abs() < 1e-9 {
                            false
                        } else {
                            return None;
                        };
                        let w = b.offset + k;
                        match weight_state[w] {
                            None => weight_state[w] = Some(on),
                            Some(prev) if prev != on => return None,
                            _ => {}
                        }
                    }
                }
                Some(
                    (0..self.total_dim())
                        .filter(|&pos| weight_state[pos.count_ones() as usize] == Some(true))
                        .collect(),
                )
            }
            Acceptance::Dense { basis } => {
                let mut out = vec![];
                for e in 0..basis.nrows() {
                    let p: f64 = basis.row(e).iter().map(|z| z.norm_sqr()).sum();
                    if (p - 1.0).abs() < 1e-9 {
                        out.push(e);
                    } else if p.abs() >= 1e-9 {
                        return None;
                    }
                }
                Some(out)
            }
        }
    }
}

/// `min(rank, dim − rank)`.
pub fn min_acceptance_dimension(p: &NCopyProjector, total_dim: usize) -> usize {
    p.rank.min(total_dim.saturating_sub(p.rank))
}

/// Single-copy data of a pair (ρ, σ) in σ's eigenbasis, ordered by ascending modular energy.
#[derive(Clone, Debug)]
pub struct PairSetup {
    pub d: usize,
    /// Eigenvalues of σ (descending).
    pub s: Vec<f64>,
    /// Eigenvalues of ρ (descending).
    pub r: Vec<f64>,
    /// Overlaps `U_ab = ⟨E_a|Ẽ_b⟩`.
    pub u: CMat,
    /// Diagonal of ρ in σ's eigenbasis.
    pub rho_d: Vec<f64>,
    /// Columns `|E_a⟩`.
    pub sigma_basis: CMat,
}

fn energy(p: f64) -> f64 {
    if p > LOG_FLOOR {
        -p.ln()
    } else {
        f64::INFINITY
    }
}

fn descending(spec: &crate::numeric::SpectralDecomposition) -> (Vec<f64>, CMat) {
    let d = spec.dim();
    let vals: Vec<f64> = spec.eigenvalues.iter().rev().copied().collect();
    let mut vecs = CMat::zeros(d, d);
    for k in 0..d {
        vecs.set_column(k, &spec.eigenvectors.column(d - 1 - k));
    }
    (vals, vecs)
}

/// Rotates each degenerate block of `basis` so that `other` compressed to it is diagonal (descending).
fn resolve_degeneracies(vals: &[f64], basis: &mut CMat, other: &CMat) -> Result<()> {
    let d = vals.len();
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals[start] - vals[end]).abs() <= 1e-12 {
            end += 1;
        }
        if end - start > 1 {
            let block = basis.columns(start, end - start).into_owned();
            let compressed = hermitian_part(&(block.adjoint() * other * &block));
            let (_, w) = descending(&eig_hermitian(&compressed)?);
            basis.columns_mut(start, end - start).copy_from(&(block * w));
        }
        start = end;
    }
    Ok(())
}

impl PairSetup {
    /// Builds the single-copy data; degenerate eigenspaces of either state are resolved by diagonalizing the other within them.
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(QhtError::DimensionMismatch {
                expected: sigma.dim(),
                found: rho.dim(),
            });
        }
        let d = sigma.dim();
        let (s, mut basis) = descending(sigma.spectral());
        resolve_degeneracies(&s, &mut basis, rho.matrix())?;
        fix_phases(&mut basis);
        let (r, mut rho_basis) = descending(rho.spectral());
        resolve_degeneracies(&r, &mut rho_basis, sigma.matrix())?;
        let u = basis.adjoint() * &rho_basis;
        let rho_d = (0..d)
            .map(|a| {
                let v = basis.column(a).into_owned();
                v.dotc(&(rho.matrix() * &v)).re
            })
            .collect();
        Ok(Self {
            d,
            s,
            r,
            u,
            rho_d,
            sigma_basis: basis,
        })
    }

    /// Builds the data directly from spectra and an overlap matrix.
    pub fn from_parts(s: Vec<f64>, r: Vec<f64>, u: CMat) -> Result<Self> {
        let d = s.len();
        if r.len() != d || u.nrows() != d || u.ncols() != d {
            return Err(QhtError::DimensionMismatch {
                expected: d,
                found: r.len(),
            });
        }
        let defect = crate::numeric::unitarity_defect(&u);
        if defect > 1e-10 {
            return Err(QhtError::NonUnitary { deviation: defect });
        }
        let rho_d = (0..d)
            .map(|a| (0..d).map(|b| r[b] * u[(a, b)].norm_sqr()).sum())
            .collect();
        Ok(Self {
            d,
            s,
            r,
            u,
            rho_d,
            sigma_basis: CMat::identity(d, d),
        })
    }

    pub fn e(&self) -> Vec<f64> {
        self.s.iter().map(|&x| energy(x)).collect()
    }

    pub fn e_tilde(&self) -> Vec<f64> {
        self.r.iter().map(|&x| energy(x)).collect()
    }

    pub fn e_pinched(&self) -> Vec<f64> {
        self.rho_d.iter().map(|&x| energy(x)).collect()
    }

    /// The permutation `a ↦ b` with `|U_ab| = 1` when ρ and σ commute.
    pub fn commuting_permutation(&self) -> Option<Vec<usize>> {
        let mut perm = Vec::with_capacity(self.d);
        let mut used = vec![false; self.d];
        for a in 0..self.d {
            let (b, w) = (0..self.d)
                .map(|b| (b, self.u[(a, b)].norm_sqr()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if w < 1.0 - 1e-12 || used[b] {
                return None;
            }
            used[b] = true;
            perm.push(b);
        }
        Some(perm)
    }

    /// `(S, V)` of the pinched state `ρ_D` against σ.
    pub fn pinched_divergences(&self) -> Result<(f64, f64)> {
        let mut s_val = 0.0;
        for a in 0..self.d {
            let p = self.rho_d[a];
            if p <= LOG_FLOOR {
                continue;
            }
            if self.s[a] <= LOG_FLOOR {
                return Err(QhtError::SupportViolation { eigenvalue: self.s[a] });
            }
            s_val += p * (p.ln() - self.s[a].ln());
        }
        let mut v = 0.0;
        for a in 0..self.d {
            let p = self.rho_d[a];
            if p > LOG_FLOOR {
                let x = p.ln() - self.s[a].ln() - s_val;
                v += p * x * x;
            }
        }
        Ok((s_val, v))
    }
}

/// Sum `Σ_a k_a E_a` over labels with nonzero count, so that `0·∞` never arises.
fn count_energy(counts: &[u32], energies: &[f64]) -> f64 {
    counts
        .iter()
        .zip(energies)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, &e)| k as f64 * e)
        .sum()
}

/// Closed acceptance test `ΣE − ΣẼ ≥ n𝓔` with the tie slack.
fn accepts(sum_e: f64, sum_et: f64, n_threshold: f64) -> bool {
    if sum_e == f64::INFINITY {
        return true;
    }
    if sum_et == f64::INFINITY {
        return false;
    }
    sum_e - sum_et >= n_threshold - TIE_TOLERANCE * n_threshold.abs().max(1.0)
}

/// All occurrence-count vectors of length `d` summing to `n`, in lexicographic order.
pub fn compositions(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(left as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u32);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    if d == 0 {
        return out;
    }
    rec(n, d, &mut vec![], &mut out);
    out
}

fn type_of(indices: &[usize], d: usize) -> Vec<u32> {
    let mut t = vec![0u32; d];
    for &i in indices {
        t[i] += 1;
    }
    t
}

fn multinomial(counts: &[u32]) -> f64 {
    let mut left: u64 = counts.iter().map(|&k| k as u64).sum();
    let mut acc = 1.0;
    for &k in counts {
        acc *= binomial(left, k as u64);
        left -= k as u64;
    }
    acc
}

fn product_weight(counts: &[u32], p: &[f64]) -> f64 {
    counts
        .iter()
        .zip(p)
        .map(|(&k, &x)| x.powi(k as i32))
        .product()
}

fn types_projector(d: usize, n: usize, keep: impl Fn(&[u32]) -> bool) -> NCopyProjector {
    let accepted: Vec<Vec<u32>> = compositions(n, d).into_iter().filter(|t| keep(t)).collect();
    let rank = accepted.iter().map(|t| multinomial(t)).sum::<f64>().round() as usize;
    NCopyProjector {
        n,
        d,
        acceptance: Acceptance::Types { accepted },
        rank,
    }
}

/// `𝓔 = S + √(V/n)·Φ⁻¹(ε)` for the given mode.
pub fn acceptance_threshold(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    epsilon: f64,
    mode: Mode,
) -> Result<AcceptanceThreshold> {
    let (s, v) = match mode {
        Mode::Optimal => (relative_entropy(rho, sigma)?, relative_entropy_variance(rho, sigma)?),
        Mode::Classical => PairSetup::new(rho, sigma)?.pinched_divergences()?,
    };
    threshold_from(s, v, n, epsilon, mode)
}

/// Threshold from precomputed `(S, V)`.
pub fn threshold_from(s: f64, v: f64, n: usize, epsilon: f64, mode: Mode) -> Result<AcceptanceThreshold> {
    if !s.is_finite() || !v.is_finite() {
        return Err(invalid("relative entropy or its variance is not finite"));
    }
    if n == 0 {
        return Err(invalid("number of copies must be positive"));
    }
    let z = normal_quantile(epsilon)?;
    Ok(AcceptanceThreshold {
        value: s + (v.max(0.0) / n as f64).sqrt() * z,
        epsilon,
        n,
        mode,
    })
}

/// Construction route for the optimal projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimalMethod {
    /// Commuting pairs use label types, qubits use spin blocks, the rest is dense.
    Auto,
    Spin,
    Dense,
}

/// Projector onto the span of `|ξ(Ẽ)⟩ = Σ_{𝐄: |𝐄|−|Ẽ| ≥ 𝓔} ⟨𝐄|Ẽ⟩|𝐄⟩`.
pub fn build_optimal_projector(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    threshold: f64,
) -> Result<NCopyProjector> {
    optimal_projector(&PairSetup::new(rho, sigma)?, n, threshold, OptimalMethod::Auto)
}

/// Optimal projector from prepared single-copy data.
pub fn optimal_projector(setup: &PairSetup, n: usize, threshold: f64, method: OptimalMethod) -> Result<NCopyProjector> {
    let dim = Budget::default().labels(setup.d, n)?;
    let nthr = n as f64 * threshold;
    match method {
        OptimalMethod::Auto => {
            if let Some(perm) = setup.commuting_permutation() {
                let e = setup.e();
                let et: Vec<f64> = perm.iter().map(|&b| energy(setup.r[b])).collect();
                return Ok(types_projector(setup.d, n, |t| {
                    accepts(count_energy(t, &e), count_energy(t, &et), nthr)
                }));
            }
            if setup.d == 2 {
                return spin_optimal(setup, n, nthr);
            }
            dense_optimal(setup, n, nthr, dim)
        }
        OptimalMethod::Spin => {
            if setup.d != 2 {
                return Err(invalid("spin-block construction needs qubits"));
            }
            spin_optimal(setup, n, nthr)
        }
        OptimalMethod::Dense => dense_optimal(setup, n, nthr, dim),
    }
}

/// Likelihood ratio test: accepts `𝐄` when `Σᵢ (E_{aᵢ} + log ⟨E_{aᵢ}|ρ|E_{aᵢ}⟩) ≥ n𝓔`.
pub fn build_lrt_projector(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    threshold: f64,
) -> Result<NCopyProjector> {
    lrt_projector(&PairSetup::new(rho, sigma)?, n, threshold)
}

pub fn lrt_projector(setup: &PairSetup, n: usize, threshold: f64) -> Result<NCopyProjector> {
    Budget::default().labels(setup.d, n)?;
    let e = setup.e();
    let ed = setup.e_pinched();
    let nthr = n as f64 * threshold;
    Ok(types_projector(setup.d, n, |t| {
        accepts(count_energy(t, &e), count_energy(t, &ed), nthr)
    }))
}

/// Binomial-type spin blocks `(2J, offset, multiplicity)` of `(ℂ²)^{⊗n}`, largest spin first.
pub fn spin_blocks(n: usize) -> Vec<(usize, usize, f64)> {
    (0..=n / 2)
        .map(|off| {
            let mult = binomial(n as u64, off as u64)
                - if off > 0 { binomial(n as u64, off as u64 - 1) } else { 0.0 };
            (n - 2 * off, off, mult)
        })
        .collect()
}

/// Matrix of `U^{⊗N}` on the symmetric subspace in the normalized weight basis.
pub fn symmetric_power(u: &CMat, big_n: usize) -> CMat {
    let poly_mul = |a: &[C64], b: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let pow = |base: [C64; 2], e: usize| -> Vec<C64> {
        let mut acc = vec![C64::new(1.0, 0.0)];
        for _ in 0..e {
            acc = poly_mul(&acc, &base);
        }
        acc
    };
    let mut m = CMat::zeros(big_n + 1, big_n + 1);
    for kt in 0..=big_n {
        let p = poly_mul(
            &pow([u[(0, 0)], u[(1, 0)]], big_n - kt),
            &pow([u[(0, 1)], u[(1, 1)]], kt),
        );
        for l in 0..=big_n {
            let scale = (binomial(big_n as u64, kt as u64) / binomial(big_n as u64, l as u64)).sqrt();
            m[(l, kt)] = p[l] * scale;
        }
    }
    m
}

fn spin_optimal(setup: &PairSetup, n: usize, nthr: f64) -> Result<NCopyProjector> {
    let e = setup.e();
    let et = setup.e_tilde();
    let blocks = spin_blocks(n);
    let columns: Vec<(CMat, Vec<f64>)> = blocks
        .par_iter()
        .map(|&(two_j, off, _)| {
            let sym = symmetric_power(&setup.u, two_j);
            let mut x = CMat::zeros(two_j + 1, two_j + 1);
            for kt in 0..=two_j {
                let wt = (off + kt) as u32;
                let set = count_energy(&[n as u32 - wt, wt], &et);
                for k in 0..=two_j {
                    let w = (off + k) as u32;
                    if accepts(count_energy(&[n as u32 - w, w], &e), set, nthr) {
                        x[(k, kt)] = sym[(k, kt)];
                    }
                }
            }
            let sv = singular_values(&x);
            (x, sv)
        })
        .collect();
    let smax = columns
        .iter()
        .flat_map(|(_, sv)| sv.first().copied())
        .fold(0.0, f64::max);
    let thr = (1u64 << n.min(60)) as f64 * f64::EPSILON;
    let mut out = vec![];
    let mut rank = 0.0;
    for ((two_j, off, mult), (x, _)) in blocks.into_iter().zip(columns) {
        let q = if smax > 0.0 {
            span_above(&x, thr * smax)
        } else {
            CMat::zeros(two_j + 1, 0)
        };
        rank += mult * q.ncols() as f64;
        out.push(SpinBlock {
            two_j,
            offset: off,
            multiplicity: mult,
            rank: q.ncols(),
            projector: &q * q.adjoint(),
        });
    }
    Ok(NCopyProjector {
        n,
        d: 2,
        acceptance: Acceptance::Spin { blocks: out },
        rank: rank.round() as usize,
    })
}

fn dense_optimal(setup: &PairSetup, n: usize, nthr: f64, dim: usize) -> Result<NCopyProjector> {
    if dim > DENSE_OPTIMAL_CAP {
        return Err(QhtError::BudgetExceeded {
            what: format!("dense optimal construction on {dim} labels"),
            limit: DENSE_OPTIMAL_CAP as u64,
        });
    }
    let d = setup.d;
    let e = setup.e();
    let et = setup.e_tilde();
    let labels: Vec<Vec<usize>> = (0..dim)
        .map(|p| TensorBasisLabel::from_position(p, d, n).indices)
        .collect();
    let sum_e: Vec<f64> = labels.iter().map(|l| count_energy(&type_of(l, d), &e)).collect();
    let sum_et: Vec<f64> = labels.iter().map(|l| count_energy(&type_of(l, d), &et)).collect();
    let cols: Vec<usize> = (0..dim).filter(|&b| sum_et[b].is_finite()).collect();
    let col_data: Vec<Vec<C64>> = cols
        .par_iter()
        .map(|&b| {
            (0..dim)
                .map(|a| {
                    if accepts(sum_e[a], sum_et[b], nthr) {
                        labels[a]
                            .iter()
                            .zip(&labels[b])
                            .map(|(&x, &y)| setup.u[(x, y)])
                            .product()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut x = CMat::zeros(dim, cols.len());
    for (k, data) in col_data.into_iter().enumerate() {
        x.set_column(k, &CVec::from_vec(data));
    }
    let basis = orthonormal_span(&x, None);
    Ok(NCopyProjector {
        n,
        d,
        rank: basis.ncols(),
        acceptance: Acceptance::Dense { basis },
    })
}

/// Applies the single-copy matrix `m` to every tensor factor of each column.
fn apply_each_copy(x: &CMat, m: &CMat, d: usize, n: usize) -> CMat {
    let mut cur = x.clone();
    let dim = x.nrows();
    for copy in 0..n {
        let stride = d.pow((n - 1 - copy) as u32);
        let mut next = CMat::zeros(dim, x.ncols());
        for col in 0..x.ncols() {
            for idx in 0..dim {
                let digit = (idx / stride) % d;
                let base = idx - digit * stride;
                let v = cur[(idx, col)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for out in 0..d {
                    next[(base + out * stride, col)] += m[(out, digit)] * v;
                }
            }
        }
        cur = next;
    }
    cur
}

/// Exact errors of a projector built for the same pair.
pub fn errors(rho: &DensityMatrix, sigma: &DensityMatrix, p: &NCopyProjector) -> Result<ErrorPair> {
    PairSetup::new(rho, sigma)?.errors(p)
}

impl PairSetup {
    /// `α = 1 − Tr ρ^{⊗n}P` and `β = Tr σ^{⊗n}P`.
    pub fn errors(&self, p: &NCopyProjector) -> Result<ErrorPair> {
        if p.d != self.d {
            return Err(QhtError::DimensionMismatch {
                expected: self.d,
                found: p.d,
            });
        }
        let n = p.n;
        match &p.acceptance {
            Acceptance::Types { accepted } => {
                let mut beta = 0.0;
                let mut accept_rho = 0.0;
                for t in accepted {
                    let m = multinomial(t);
                    beta += m * product_weight(t, &self.s);
                    accept_rho += m * product_weight(t, &self.rho_d);
                }
                Ok(ErrorPair {
                    alpha: 1.0 - accept_rho,
                    beta,
                })
            }
            Acceptance::Spin { blocks } => {
                if self.d != 2 {
                    return Err(invalid("spin blocks need qubits"));
                }
                let mut beta = 0.0;
                let mut accept_rho = 0.0;
                for b in blocks {
                    let sym = symmetric_power(&self.u, b.two_j);
                    let lam: Vec<f64> = (0..=b.two_j)
                        .map(|k| {
                            let w = (b.offset + k) as u32;
                            product_weight(&[n as u32 - w, w], &self.r)
                        })
                        .collect();
                    let mut rho_block = sym.clone();
                    for (j, &l) in lam.iter().enumerate() {
                        rho_block.column_mut(j).scale_mut(l);
                    }
                    let rho_block = rho_block * sym.adjoint();
                    let mut bb = 0.0;
                    for k in 0..=b.two_j {
                        let w = (b.offset + k) as u32;
                        bb += product_weight(&[n as u32 - w, w], &self.s) * b.projector[(k, k)].re;
                    }
                    beta += b.multiplicity * bb;
                    accept_rho += b.multiplicity * crate::numeric::trace_product(&rho_block, &b.projector).re;
                }
                Ok(ErrorPair {
                    alpha: 1.0 - accept_rho,
                    beta,
                })
            }
            Acceptance::Dense { basis } => {
                let dim = basis.nrows();
                let mut beta = 0.0;
                for e in 0..dim {
                    let label = TensorBasisLabel::from_position(e, self.d, n);
                    let w: f64 = label.indices.iter().map(|&i| self.s[i]).product();
                    let pe: f64 = basis.row(e).iter().map(|z| z.norm_sqr()).sum();
                    beta += w * pe;
                }
                let rotated = apply_each_copy(basis, &self.u.adjoint(), self.d, n);
                let mut accept_rho = 0.0;
                for b in 0..dim {
                    let label = TensorBasisLabel::from_position(b, self.d, n);
                    let w: f64 = label.indices.iter().map(|&i| self.r[i]).product();
                    if w == 0.0 {
                        continue;
                    }
                    let pb: f64 = rotated.row(b).iter().map(|z| z.norm_sqr()).sum();
                    accept_rho += w * pb;
                }
                Ok(ErrorPair {
                    alpha: 1.0 - accept_rho,
                    beta,
                })
            }
        }
    }
}

/// Projector onto the strictly positive part of `κρ^{⊗n} − (1−κ)σ^{⊗n}`.
pub fn symmetric_projector(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize, kappa: f64) -> Result<NCopyProjector> {
    symmetric_from_setup(&PairSetup::new(rho, sigma)?, n, kappa)
}

/// Eigenvalues of `L` within this relative distance of zero count as non-positive.
const SYMMETRIC_ZERO_TOL: f64 = 1e-12;

pub fn symmetric_from_setup(setup: &PairSetup, n: usize, kappa: f64) -> Result<NCopyProjector> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    let dim = Budget::default().labels(setup.d, n)?;
    if setup.commuting_permutation().is_some() {
        // L is diagonal: compare the two product weights type by type in log form.
        let (lk, lk1) = (kappa.ln(), (1.0 - kappa).ln());
        let log_or_neg = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
        let lr: Vec<f64> = setup.rho_d.iter().map(|&x| log_or_neg(x)).collect();
        let ls: Vec<f64> = setup.s.iter().map(|&x| log_or_neg(x)).collect();
        let wsum = |t: &[u32], l: &[f64]| -> f64 {
            t.iter()
                .zip(l)
                .filter(|(&k, _)| k > 0)
                .map(|(&k, &x)| k as f64 * x)
                .sum()
        };
        return Ok(types_projector(setup.d, n, |t| {
            let a = lk + wsum(t, &lr);
            let b = lk1 + wsum(t, &ls);
            a > b + SYMMETRIC_ZERO_TOL * a.abs().max(b.abs()).max(1.0) || (a.is_finite() && b == f64::NEG_INFINITY)
        }));
    }
    if setup.d == 2 {
        let mut blocks = vec![];
        let mut rank = 0.0;
        for (two_j, off, mult) in spin_blocks(n) {
            let sym = symmetric_power(&setup.u, two_j);
            let weight = |p: &[f64], k: usize| {
                let w = (off + k) as u32;
                product_weight(&[n as u32 - w, w], p)
            };
            let mut rb = sym.clone();
            for j in 0..=two_j {
                rb.column_mut(j).scale_mut(weight(&setup.r, j));
            }
            let rb = rb * sym.adjoint();
            let mut l = rb.scale(kappa);
            for k in 0..=two_j {
                l[(k, k)] -= C64::new((1.0 - kappa) * weight(&setup.s, k), 0.0);
            }
            let (p, r) = positive_part(&l)?;
            rank += mult * r as f64;
            blocks.push(SpinBlock {
                two_j,
                offset: off,
                multiplicity: mult,
                projector: p,
                rank: r,
            });
        }
        return Ok(NCopyProjector {
            n,
            d: 2,
            acceptance: Acceptance::Spin { blocks },
            rank: rank.round() as usize,
        });
    }
    if dim > DENSE_SYMMETRIC_CAP {
        return Err(QhtError::BudgetExceeded {
            what: format!("dense symmetric test on {dim} labels"),
            limit: DENSE_SYMMETRIC_CAP as u64,
        });
    }
    let rho1 = &setup.u * crate::numeric::diag_real(&setup.r) * setup.u.adjoint();
    let mut rho_n = CMat::identity(1, 1);
    let mut sig_n = vec![1.0f64];
    for _ in 0..n {
        rho_n = rho_n.kronecker(&rho1);
        sig_n = sig_n
            .iter()
            .flat_map(|&x| setup.s.iter().map(move |&y| x * y))
            .collect();
    }
    let mut l = rho_n.scale(kappa);
    for (k, &w) in sig_n.iter().enumerate() {
        l[(k, k)] -= C64::new((1.0 - kappa) * w, 0.0);
    }
    let spec = eig_hermitian(&hermitian_part(&l))?;
    let scale = spec.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let keep: Vec<usize> = (0..dim)
        .filter(|&i| spec.eigenvalues[i] > SYMMETRIC_ZERO_TOL * scale)
        .collect();
    let mut basis = CMat::zeros(dim, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &spec.eigenvectors.column(i));
    }
    Ok(NCopyProjector {
        n,
        d: setup.d,
        rank: keep.len(),
        acceptance: Acceptance::Dense { basis },
    })
}

fn positive_part(l: &CMat) -> Result<(CMat, usize)> {
    let spec = eig_hermitian(&hermitian_part(l))?;
    let scale = spec.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut rank = 0;
    let p = spec.apply(|x| {
        if x > SYMMETRIC_ZERO_TOL * scale {
            1.0
        } else {
            0.0
        }
    });
    for &x in &spec.eigenvalues {
        if x > SYMMETRIC_ZERO_TOL * scale {
            rank += 1;
        }
    }
    Ok((p, rank))
}

/// Errors of the product test `A = (1 − B/n)^{⊗n}`.
pub fn independent_baseline(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize, b: &CMat) -> Result<ErrorPair> {
    if n == 0 {
        return Err(invalid("number of copies must be positive"));
    }
    let spec = eig_hermitian(b)?;
    let nf = n as f64;
    if spec.eigenvalues.iter().any(|&x| x < -1e-12 || x / nf > 1.0 + 1e-12) {
        return Err(invalid("B/n must satisfy 0 <= B/n <= 1"));
    }
    let tr_rho = crate::states::expectation(b, rho);
    let tr_sigma = crate::states::expectation(b, sigma);
    Ok(ErrorPair {
        alpha: 1.0 - (1.0 - tr_rho / nf).powi(n as i32),
        beta: (1.0 - tr_sigma / nf).powi(n as i32),
    })
}

/// One row of a Stein exponent table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SteinRow {
    pub n: usize,
    pub mode: Mode,
    pub epsilon: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub neg_log_beta_over_n: f64,
    pub min_acc_dim: usize,
}

/// Per-n errors of the mode's measurement at its own second-order threshold.
pub fn stein_exponent_table(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    epsilon: f64,
    n_list: &[usize],
    mode: Mode,
) -> Result<Vec<SteinRow>> {
    let setup = PairSetup::new(rho, sigma)?;
    let (s, v) = match mode {
        Mode::Optimal => (relative_entropy(rho, sigma)?, relative_entropy_variance(rho, sigma)?),
        Mode::Classical => setup.pinched_divergences()?,
    };
    stein_rows(&setup, s, v, epsilon, n_list, mode)
}

/// Table rows from prepared data and divergences.
pub fn stein_rows(setup: &PairSetup, s: f64, v: f64, epsilon: f64, n_list: &[usize], mode: Mode) -> Result<Vec<SteinRow>> {
    n_list
        .iter()
        .map(|&n| {
            let thr = threshold_from(s, v, n, epsilon, mode)?;
            let p = match mode {
                Mode::Optimal => optimal_projector(setup, n, thr.value, OptimalMethod::Auto)?,
                Mode::Classical => lrt_projector(setup, n, thr.value)?,
            };
            let err = setup.errors(&p)?;
            Ok(SteinRow {
                n,
                mode,
                epsilon,
                threshold: thr.value,
                alpha: err.alpha,
                beta: err.beta,
                neg_log_beta_over_n: -err.beta.ln() / n as f64,
                min_acc_dim: min_acceptance_dimension(&p, p.total_dim()),
            })
        })
        .collect()
}

/// `((1 − α)(−log β), nS + log 2)`: the two sides of the trade-off bound.
pub fn tradeoff_sides(err: ErrorPair, n: usize, s: f64) -> (f64, f64) {
    let lhs = if err.alpha >= 1.0 {
        0.0
    } else {
        (1.0 - err.alpha) * -err.beta.ln()
    };
    (lhs, n as f64 * s + std::f64::consts::LN_2)
}
