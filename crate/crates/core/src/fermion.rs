//! Gaussian states of spinless fermions on a subsystem of ℓ sites.
//!
//! A full-rank reduced state is fixed by its correlation matrix
//! `C_ij = Tr ρ ψ†_i ψ_j`, and its modular Hamiltonian is the bilinear
//! `K = Σ ψ†_i A_ij ψ_j` with `A = log((1 − C)/C)`. Rows of the orthogonal
//! matrix `v` are the single-particle eigenvectors, `A = vᵀ diag(E) v`.
//!
//! Fock states are indexed by occupation strings with site 0 as the most
//! significant bit, and `|n⟩ = ψ†_{i₁} ψ†_{i₂} ⋯ |0⟩` with `i₁ < i₂ < ⋯`.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, QhtError, Result};
use crate::numeric::{adaptive_quadrature, to_complex};
use crate::states::{thermal_state, DensityMatrix};

pub type RMat = DMatrix<f64>;

/// Symmetry tolerance for real matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// Largest subsystem for dense Fock-space oracles.
pub const DENSE_MAX_SITES: usize = 6;

fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn check_symmetric(m: &RMat, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!("{what} must be square")));
    }
    let asym = max_abs(&(m - m.transpose()));
    if asym > SYMMETRY_TOL * max_abs(m).max(1.0) {
        return Err(invalid(format!("{what} is not symmetric (asymmetry {asym:.3e})")));
    }
    Ok(())
}

/// Symmetric eigendecomposition with ascending eigenvalues (columns are eigenvectors).
fn sym_eig(m: &RMat) -> (Vec<f64>, RMat) {
    let sym = (m + m.transpose()) * 0.5;
    let e = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = RMat::zeros(m.nrows(), m.ncols());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

fn spectral_map(vals: &[f64], vecs: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let d = RMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&x| f(x))));
    vecs * d * vecs.transpose()
}

/// Two-point function `C_ij = Tr σ ψ†_i ψ_j` of a full-rank Gaussian state.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationMatrix {
    #[serde(serialize_with = "serialize_real")]
    pub c: RMat,
}

fn serialize_real<S: serde::Serializer>(m: &RMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

impl CorrelationMatrix {
    /// Requires symmetry and spectrum strictly inside (0, 1).
    pub fn new(c: RMat) -> Result<Self> {
        check_symmetric(&c, "correlation matrix")?;
        let (vals, _) = sym_eig(&c);
        if let Some(&bad) = vals.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(QhtError::InvalidState(format!(
                "correlation eigenvalue {bad} outside (0, 1)"
            )));
        }
        Ok(Self { c })
    }

    /// `C = 1/(1 + e^A)`.
    pub fn from_modular(a: &RMat) -> Result<Self> {
        check_symmetric(a, "modular matrix")?;
        let (vals, vecs) = sym_eig(a);
        Self::new(spectral_map(&vals, &vecs, logistic))
    }

    pub fn sites(&self) -> usize {
        self.c.nrows()
    }

    /// Eigenvalues (ascending) and eigenvectors as columns.
    pub fn spectrum(&self) -> (Vec<f64>, RMat) {
        sym_eig(&self.c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain numbers")["c"].clone()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let rows: Vec<Vec<f64>> =
            serde_json::from_value(v.clone()).map_err(|e| invalid(format!("bad matrix JSON: {e}")))?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("matrix JSON must be square"));
        }
        Self::new(RMat::from_fn(n, n, |i, j| rows[i][j]))
    }
}

/// `1/(1 + e^x)` without overflow.
pub fn logistic(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Modular Hamiltonian matrices `K = Σ ψ†Aψ + ½Σ(ψ†Bψ† − ψBψ)`.
#[derive(Clone, Debug)]
pub struct ModularMatrix {
    pub a: RMat,
    pub b: Option<RMat>,
}

impl ModularMatrix {
    pub fn new(a: RMat, b: Option<RMat>) -> Result<Self> {
        check_symmetric(&a, "A")?;
        if let Some(b) = &b {
            if b.shape() != a.shape() {
                return Err(QhtError::DimensionMismatch {
                    expected: a.nrows(),
                    found: b.nrows(),
                });
            }
            let sym = max_abs(&(b + b.transpose()));
            if sym > SYMMETRY_TOL * max_abs(b).max(1.0) {
                return Err(invalid(format!("B is not antisymmetric (defect {sym:.3e})")));
            }
        }
        Ok(Self { a, b })
    }
}

/// `A = log((1 − C)C⁻¹)` by joint spectral calculus.
pub fn modular_matrix_from_c(c: &CorrelationMatrix) -> Result<ModularMatrix> {
    let (vals, vecs) = c.spectrum();
    let a = spectral_map(&vals, &vecs, |x| ((1.0 - x) / x).ln());
    Ok(ModularMatrix { a, b: None })
}

/// `log Z = −log det(1 − C)`.
pub fn partition_log(c: &CorrelationMatrix) -> f64 {
    let (vals, _) = c.spectrum();
    -vals.iter().map(|&x| (-x).ln_1p()).sum::<f64>()
}

/// Thermal two-point function of the isotropic XY chain at infinite length,
/// `C_ij = (1/π)∫₀^π cos(q(i−j)) / (e^{β cos q} + 1) dq`.
pub fn xy_correlation(beta: f64, sites: &[i64]) -> Result<CorrelationMatrix> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be finite and non-negative, got {beta}")));
    }
    let mut seen = std::collections::HashSet::new();
    if !sites.iter().all(|s| seen.insert(*s)) {
        return Err(invalid("sites must be distinct"));
    }
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let l = sites.len();
    let mut c = RMat::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let r = sites[i].abs_diff(sites[j]);
            let val = match cache.get(&r) {
                Some(&v) => v,
                None => {
                    let v = xy_two_point(beta, r)?;
                    cache.insert(r, v);
                    v
                }
            };
            c[(i, j)] = val;
            c[(j, i)] = val;
        }
    }
    CorrelationMatrix::new(c)
}

/// Absolute quadrature tolerance for the XY integral.
pub const XY_QUADRATURE_TOL: f64 = 1e-12;

/// One entry of the XY correlation matrix at separation `r`.
pub fn xy_two_point(beta: f64, r: u64) -> Result<f64> {
    let rf = r as f64;
    let v = adaptive_quadrature(
        |q| (q * rf).cos() * logistic(beta * q.cos()),
        0.0,
        std::f64::consts::PI,
        XY_QUADRATURE_TOL,
    )?;
    Ok(v / std::f64::consts::PI)
}

/// Annihilation operators `ψ_i` on the `2^ℓ`-dimensional Fock space.
pub fn annihilation_operators(l: usize) -> Result<Vec<RMat>> {
    if l == 0 || l > DENSE_MAX_SITES {
        return Err(QhtError::BudgetExceeded {
            what: format!("dense Fock space on {l} sites"),
            limit: DENSE_MAX_SITES as u64,
        });
    }
    let dim = 1usize << l;
    Ok((0..l)
        .map(|i| {
            let bit = l - 1 - i;
            let mut m = RMat::zeros(dim, dim);
            for s in 0..dim {
                if (s >> bit) & 1 == 1 {
                    // Sites before i are the more significant bits.
                    let before = (s >> (bit + 1)).count_ones();
                    let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
                    m[(s & !(1 << bit), s)] = sign;
                }
            }
            m
        })
        .collect())
}

/// Dense `e^{−K}/Z` for `K = Σ A_ij ψ†_i ψ_j`.
pub fn dense_rdm(m: &ModularMatrix) -> Result<DensityMatrix> {
    if m.b.as_ref().is_some_and(|b| max_abs(b) > 0.0) {
        return Err(invalid("dense assembly supports B = 0 only"));
    }
    let l = m.a.nrows();
    let psi = annihilation_operators(l)?;
    let dim = 1usize << l;
    let mut k = RMat::zeros(dim, dim);
    for i in 0..l {
        for j in 0..l {
            if m.a[(i, j)] != 0.0 {
                k += psi[i].transpose() * &psi[j] * m.a[(i, j)];
            }
        }
    }
    thermal_state(&to_complex(&k), 1.0)
}

/// Two-point function `Tr ρ ψ†_i ψ_j` of a dense Fock-space state.
pub fn dense_two_point(rho: &DensityMatrix) -> Result<RMat> {
    let l = rho.dim().trailing_zeros() as usize;
    if 1usize << l != rho.dim() {
        return Err(invalid("dimension is not a power of two"));
    }
    let psi = annihilation_operators(l)?;
    Ok(RMat::from_fn(l, l, |i, j| {
        let op = to_complex(&(psi[i].transpose() * &psi[j]));
        crate::numeric::trace_product(rho.matrix(), &op).re
    }))
}

/// `S(ρ‖σ)` for σ ↔ `c` and ρ ↔ `ct`: `Tr[(A − Ã)C̃] + Σ log((1 − c̃)/(1 − c))`.
pub fn fermion_relative_entropy(c: &CorrelationMatrix, ct: &CorrelationMatrix) -> Result<f64> {
    if c.sites() != ct.sites() {
        return Err(QhtError::DimensionMismatch {
            expected: c.sites(),
            found: ct.sites(),
        });
    }
    let a = modular_matrix_from_c(c)?.a;
    let at = modular_matrix_from_c(ct)?.a;
    let tr = ((&a - &at) * &ct.c).trace();
    Ok(tr + partition_log(c) - partition_log(ct))
}

/// `V(ρ‖σ) = Tr[ΔA (1 − C̃) ΔA C̃]` with `ΔA = A − Ã`.
pub fn fermion_variance(c: &CorrelationMatrix, ct: &CorrelationMatrix) -> Result<f64> {
    if c.sites() != ct.sites() {
        return Err(QhtError::DimensionMismatch {
            expected: c.sites(),
            found: ct.sites(),
        });
    }
    let l = c.sites();
    let da = modular_matrix_from_c(c)?.a - modular_matrix_from_c(ct)?.a;
    let one_minus = RMat::identity(l, l) - &ct.c;
    Ok((&da * one_minus * &da * &ct.c).trace())
}

/// Relative entropy of commuting Gaussian states from their single-particle energies.
pub fn commuting_relative_entropy(e: &[f64], et: &[f64]) -> f64 {
    e.iter()
        .zip(et)
        .map(|(&x, &y)| (x - y) * logistic(y) + ((-x).exp().ln_1p() - (-y).exp().ln_1p()))
        .sum()
}

/// Variance of commuting Gaussian states, `¼ Σ (Ẽ − E)²/cosh²(Ẽ/2)`.
pub fn commuting_variance(e: &[f64], et: &[f64]) -> f64 {
    e.iter()
        .zip(et)
        .map(|(&x, &y)| 0.25 * (y - x).powi(2) / (0.5 * y).cosh().powi(2))
        .sum()
}

/// Solution of `(A + B)v_k = E_k u_k` and `(A − B)u_k = E_k v_k`, with `v_k`, `u_k` the rows of `v`, `u`.
#[derive(Clone, Debug)]
pub struct BogoliubovPair {
    pub v: RMat,
    pub u: RMat,
    pub energies: Vec<f64>,
}

impl BogoliubovPair {
    /// `W = ½[[v+u, v−u], [v−u, v+u]]`.
    pub fn w(&self) -> RMat {
        let l = self.v.nrows();
        let p = &self.v + &self.u;
        let m = &self.v - &self.u;
        let mut w = RMat::zeros(2 * l, 2 * l);
        w.view_mut((0, 0), (l, l)).copy_from(&p);
        w.view_mut((l, l), (l, l)).copy_from(&p);
        w.view_mut((0, l), (l, l)).copy_from(&m);
        w.view_mut((l, 0), (l, l)).copy_from(&m);
        w * 0.5
    }
}

/// Diagonalizes a modular matrix. Without pairing terms `u = v` and energies may be negative.
pub fn bogoliubov_diagonalize(m: &ModularMatrix) -> Result<BogoliubovPair> {
    match &m.b {
        Some(b) if max_abs(b) > 0.0 => {
            let (uu, values, vt) = crate::numeric::real_svd(&(&m.a + b));
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
            let l = m.a.nrows();
            let mut v = RMat::zeros(l, l);
            let mut u = RMat::zeros(l, l);
            for (k, &i) in order.iter().enumerate() {
                v.set_row(k, &vt.row(i));
                u.set_row(k, &uu.column(i).transpose());
            }
            Ok(BogoliubovPair {
                v,
                u,
                energies: order.iter().map(|&i| values[i]).collect(),
            })
        }
        _ => {
            let (vals, vecs) = sym_eig(&m.a);
            let v = vecs.transpose();
            Ok(BogoliubovPair {
                u: v.clone(),
                v,
                energies: vals,
            })
        }
    }
}

/// `det_{I,J}(v ṽᵀ)`, the overlap `⟨E_I|Ẽ_J⟩` of free-fermion eigenstates.
pub fn free_overlap(v: &RMat, vt: &RMat, i: &[usize], j: &[usize]) -> Result<f64> {
    let l = v.nrows();
    if i.iter().chain(j).any(|&k| k >= l) {
        return Err(invalid("index set out of range"));
    }
    if i.len() != j.len() {
        return Ok(0.0);
    }
    if i.is_empty() {
        return Ok(1.0);
    }
    let m = v * vt.transpose();
    Ok(RMat::from_fn(i.len(), j.len(), |a, b| m[(i[a], j[b])]).determinant())
}

/// Real orthogonal `T` with `T₁₁ = T₂₂` and `T₁₂ = T₂₁`, mapping `α = (c, c†)` to `α̃ = Tα`.
#[derive(Clone, Debug)]
pub struct WickTransformation {
    pub t: RMat,
}

/// Tolerance on orthogonality and block structure of `T`.
pub const WICK_STRUCTURE_TOL: f64 = 1e-10;

/// `|det T₁₁|` below this counts as orthogonal vacua.
pub const ORTHOGONAL_VACUA_TOL: f64 = 1e-12;

impl WickTransformation {
    pub fn new(t: RMat) -> Result<Self> {
        let n = t.nrows();
        if n % 2 != 0 || !t.is_square() {
            return Err(invalid("T must be a square matrix of even size"));
        }
        let l = n / 2;
        let orth = max_abs(&(&t * t.transpose() - RMat::identity(n, n)));
        if orth > WICK_STRUCTURE_TOL {
            return Err(QhtError::NonUnitary { deviation: orth });
        }
        let d11 = max_abs(&(t.view((0, 0), (l, l)) - t.view((l, l), (l, l))));
        let d12 = max_abs(&(t.view((0, l), (l, l)) - t.view((l, 0), (l, l))));
        if d11.max(d12) > WICK_STRUCTURE_TOL {
            return Err(invalid(format!(
                "T must satisfy T11 = T22 and T12 = T21 (defects {d11:.3e}, {d12:.3e})"
            )));
        }
        Ok(Self { t })
    }

    /// `T = W̃ Wᵀ` from two Bogoliubov solutions.
    pub fn from_pairs(sigma: &BogoliubovPair, rho: &BogoliubovPair) -> Result<Self> {
        Self::new(rho.w() * sigma.w().transpose())
    }

    /// Block-diagonal `T` of two free-fermion bases.
    pub fn free(v: &RMat, vt: &RMat) -> Result<Self> {
        let l = v.nrows();
        let r = vt * v.transpose();
        let mut t = RMat::zeros(2 * l, 2 * l);
        t.view_mut((0, 0), (l, l)).copy_from(&r);
        t.view_mut((l, l), (l, l)).copy_from(&r);
        Self::new(t)
    }

    pub fn sites(&self) -> usize {
        self.t.nrows() / 2
    }

    pub fn t11(&self) -> RMat {
        let l = self.sites();
        self.t.view((0, 0), (l, l)).into_owned()
    }

    pub fn t12(&self) -> RMat {
        let l = self.sites();
        self.t.view((0, l), (l, l)).into_owned()
    }
}

/// Random valid `T` in the identity component, with `P = T₁₁ + T₁₂` and `Q = T₁₁ − T₁₂` in SO(ℓ).
pub fn random_wick_transformation<R: rand::Rng + ?Sized>(rng: &mut R, l: usize) -> WickTransformation {
    // Both factors in SO(ℓ), so the vacua share parity.
    let special = |mut m: RMat| {
        if m.determinant() < 0.0 {
            m.column_mut(0).neg_mut();
        }
        m
    };
    let p = special(crate::random::haar_orthogonal(rng, l));
    let q = special(crate::random::haar_orthogonal(rng, l));
    let t11 = (&p + &q) * 0.5;
    let t12 = (&p - &q) * 0.5;
    let mut t = RMat::zeros(2 * l, 2 * l);
    t.view_mut((0, 0), (l, l)).copy_from(&t11);
    t.view_mut((l, l), (l, l)).copy_from(&t11);
    t.view_mut((0, l), (l, l)).copy_from(&t12);
    t.view_mut((l, 0), (l, l)).copy_from(&t12);
    WickTransformation::new(t).expect("orthogonal by construction")
}

/// `⟨E_I|Ẽ_J⟩` by the generalized Wick theorem, with `I` the annihilation indices and `J` the creation indices.
///
/// The operator string is `c_{iₙ}⋯c_{i₁} 𝒯 c†_{j₁}⋯c†_{jₘ}`; pairs to the left
/// of `𝒯` contract to `(T₁₁⁻¹T₁₂)`, mixed pairs to `(T₁₁⁻¹)` and pairs to the
/// right to `(T₂₁T₁₁⁻¹)`. The vacuum overlap is the positive root `√|det T₁₁|`.
pub fn wick_overlap(t: &WickTransformation, creation_indices: &[usize], annihilation_indices: &[usize]) -> Result<f64> {
    let l = t.sites();
    if creation_indices.iter().chain(annihilation_indices).any(|&k| k >= l) {
        return Err(invalid("operator index out of range"));
    }
    let total = creation_indices.len() + annihilation_indices.len();
    if total % 2 == 1 {
        return Ok(0.0);
    }
    if total > 24 {
        return Err(invalid("at most 24 operators supported"));
    }
    let t11 = t.t11();
    let t12 = t.t12();
    let det = t11.determinant();
    if det.abs() <= ORTHOGONAL_VACUA_TOL {
        return Err(QhtError::OrthogonalVacua { det });
    }
    let inv = t11.clone().try_inverse().ok_or(QhtError::OrthogonalVacua { det })?;
    let left_left = &inv * &t12;
    let right_right = &t12 * &inv;

    // (is_left, mode) for each operator in string order.
    let ops: Vec<(bool, usize)> = annihilation_indices
        .iter()
        .rev()
        .map(|&i| (true, i))
        .chain(creation_indices.iter().map(|&j| (false, j)))
        .collect();
    let contraction = |x: usize, y: usize| -> f64 {
        let (lx, a) = ops[x];
        let (ly, b) = ops[y];
        match (lx, ly) {
            (true, true) => left_left[(a, b)],
            (true, false) => inv[(a, b)],
            (false, false) => right_right[(a, b)],
            (false, true) => unreachable!("left operators precede right ones"),
        }
    };
    let mut memo = HashMap::new();
    let pf = pfaffian_mask((1u32 << total) - 1, &contraction, &mut memo);
    Ok(det.abs().sqrt() * pf)
}

/// Pairing sum over the operators in `mask`, expanding in the first one.
fn pfaffian_mask(mask: u32, m: &dyn Fn(usize, usize) -> f64, memo: &mut HashMap<u32, f64>) -> f64 {
    if mask == 0 {
        return 1.0;
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let first = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << first);
    let mut acc = 0.0;
    let mut sign = 1.0;
    let mut bits = rest;
    while bits != 0 {
        let k = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let c = m(first, k);
        if c != 0.0 {
            acc += sign * c * pfaffian_mask(rest & !(1 << k), m, memo);
        }
        sign = -sign;
    }
    memo.insert(mask, acc);
    acc
}

/// Rotation data of a two-site subsystem.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoFermionSetup {
    pub phi: f64,
    pub phi_tilde: f64,
    /// `φ − φ̃`.
    pub angle: f64,
    pub commuting: bool,
    /// Single-particle energies of σ ordered as the rows of `v`.
    pub energies: [f64; 2],
    pub energies_tilde: [f64; 2],
}

/// Commutator norm below which two correlation matrices count as commuting.
pub const COMMUTING_TOL: f64 = 1e-10;

/// Eigenbases `v`, `ṽ` written as rotations by φ, φ̃, with eigenvectors of C̃ matched to C.
pub fn two_fermion_optimal_setup(c: &CorrelationMatrix, ct: &CorrelationMatrix) -> Result<TwoFermionSetup> {
    if c.sites() != 2 || ct.sites() != 2 {
        return Err(invalid("two-fermion setup needs two sites"));
    }
    let (cv, cvec) = c.spectrum();
    let (tv, tvec) = ct.spectrum();
    let degenerate = |v: &[f64]| (v[1] - v[0]).abs() <= 1e-12;
    let rows = |vecs: &RMat, order: [usize; 2], flip: bool| -> RMat {
        let mut v = RMat::zeros(2, 2);
        for (k, &i) in order.iter().enumerate() {
            v.set_row(k, &vecs.column(i).transpose());
        }
        if flip {
            v.row_mut(1).neg_mut();
        }
        if v.determinant() < 0.0 {
            v.row_mut(1).neg_mut();
        }
        v
    };
    let angle_of = |v: &RMat| v[(1, 0)].atan2(v[(0, 0)]);
    let wrap = |x: f64| {
        let t = std::f64::consts::TAU;
        let y = x.rem_euclid(t);
        if y > std::f64::consts::PI {
            y - t
        } else {
            y
        }
    };

    let v = if degenerate(&cv) && !degenerate(&tv) {
        rows(&tvec, [0, 1], false)
    } else {
        rows(&cvec, [0, 1], false)
    };
    let phi = angle_of(&v);
    let vt = if degenerate(&tv) {
        v.clone()
    } else {
        // Among the row assignments of C̃'s eigenvectors, keep the one closest to v.
        let mut best: Option<(f64, RMat)> = None;
        for ord in [[0, 1], [1, 0]] {
            for flip in [false, true] {
                for global in [1.0, -1.0] {
                    let cand = rows(&tvec, ord, flip) * global;
                    let d = wrap(phi - angle_of(&cand)).abs();
                    if best.as_ref().is_none_or(|b| d < b.0) {
                        best = Some((d, cand));
                    }
                }
            }
        }
        best.expect("candidates exist").1
    };
    let phi_tilde = angle_of(&vt);
    let angle = wrap(phi - phi_tilde);
    let comm = &c.c * &ct.c - &ct.c * &c.c;
    let commuting = angle.abs() < COMMUTING_TOL || max_abs(&comm) < COMMUTING_TOL;
    // Each row carries the energy of the eigenvector it is closest to.
    let row_energy = |vals: &[f64], vecs: &RMat, basis: &RMat, row: usize| -> f64 {
        let r = basis.row(row).transpose();
        let k = if vecs.column(0).dot(&r).abs() >= vecs.column(1).dot(&r).abs() { 0 } else { 1 };
        ((1.0 - vals[k]) / vals[k]).ln()
    };
    let e = [row_energy(&cv, &cvec, &v, 0), row_energy(&cv, &cvec, &v, 1)];
    let et = [row_energy(&tv, &tvec, &vt, 0), row_energy(&tv, &tvec, &vt, 1)];
    Ok(TwoFermionSetup {
        phi,
        phi_tilde,
        angle,
        commuting,
        energies: e,
        energies_tilde: et,
    })
}

/// `n_* = ⌈n(Ẽ)Δ̃/Δ + (Ẽ₀ − E₀)n/Δ + n𝓔/Δ⌉` for equal single-particle energies.
pub fn two_fermion_lrt_threshold(
    e0: f64,
    et0: f64,
    delta: f64,
    delta_tilde: f64,
    n: usize,
    n_tilde: usize,
    threshold: f64,
) -> Result<i64> {
    if !(delta > 0.0) {
        return Err(invalid(format!("Delta must be positive, got {delta}")));
    }
    let nf = n as f64;
    let x = n_tilde as f64 * delta_tilde / delta + (et0 - e0) * nf / delta + nf * threshold / delta;
    Ok(crate::qubit_lab::tolerant_ceil(x))
}
