//! Qubit pairs related by a rotation: likelihood-ratio thresholds, Krawtchouk
//! Gram matrices at θ = π/4, Terwilliger coefficients and a statevector
//! simulation of the counting circuit.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, QhtError, Result};
use crate::multicopy::{
    lrt_projector, min_acceptance_dimension, optimal_projector, threshold_from, Mode, OptimalMethod, PairSetup,
    TIE_TOLERANCE,
};
use crate::numeric::{c64, normal_quantile, unitarity_defect, CMat, C64};
use crate::states::DensityMatrix;

/// σ = diag(1−p, p) and ρ = R σ Rᵀ with the rotation `R(θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitPair {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
}

impl QubitPair {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("p must lie in (0, 1), got {p}")));
        }
        let (s, c) = theta.sin_cos();
        let q = (1.0 - p) * s * s + p * c * c;
        Ok(Self { p, q, theta })
    }

    /// Overlaps `⟨a|ã⟩` with `|0̃⟩ = cos θ|0⟩ − sin θ|1⟩` and `|1̃⟩ = sin θ|0⟩ + cos θ|1⟩`.
    pub fn overlap(&self) -> CMat {
        let (s, c) = self.theta.sin_cos();
        CMat::from_row_slice(2, 2, &[c64(c, 0.0), c64(s, 0.0), c64(-s, 0.0), c64(c, 0.0)])
    }

    pub fn sigma(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(&[1.0 - self.p, self.p]).expect("valid probabilities")
    }

    pub fn rho(&self) -> DensityMatrix {
        let u = self.overlap();
        let m = &u * crate::numeric::diag_real(&[1.0 - self.p, self.p]) * u.adjoint();
        DensityMatrix::new(crate::numeric::hermitian_part(&m)).expect("rotated state")
    }

    /// Single-copy data in σ's eigenbasis.
    pub fn setup(&self) -> Result<PairSetup> {
        PairSetup::from_parts(vec![1.0 - self.p, self.p], vec![1.0 - self.p, self.p], self.overlap())
    }

    /// `E₁ − E₀ = log((1−p)/p)`.
    pub fn energy_gap(&self) -> f64 {
        ((1.0 - self.p) / self.p).ln()
    }
}

/// A binary word of length `n`, bit `i` stored at bit position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitString {
    pub bits: u64,
    pub n: usize,
}

impl BitString {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n > 63 || (n < 64 && bits >> n != 0) {
            return Err(invalid(format!("{bits:#b} does not fit in {n} bits")));
        }
        Ok(Self { bits, n })
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }
}

/// Which closed form of the count threshold to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdForm {
    /// `⌈nq + sign(q−p)√(q(1−q)/n)Φ⁻¹(ε)⌉`.
    Printed,
    /// `⌈nq + sign(q−p)√(nq(1−q))Φ⁻¹(ε)⌉`, the count form of `S + √(V/n)Φ⁻¹(ε)` for `ρ_D`.
    Derived,
}

/// Smallest integer not below `x`, forgiving rounding noise just above an integer.
pub fn tolerant_ceil(x: f64) -> i64 {
    (x - TIE_TOLERANCE * x.abs().max(1.0)).ceil() as i64
}

/// Count threshold `n_*` of the likelihood ratio test, clamped to `[0, n+1]`.
pub fn lrt_threshold_qubit(pair: &QubitPair, n: usize, epsilon: f64, form: ThresholdForm) -> Result<i64> {
    if pair.p == pair.q {
        return Err(invalid("likelihood ratio test is undefined for p = q"));
    }
    let nf = n as f64;
    let q = pair.q;
    let z = normal_quantile(epsilon)?;
    let sign = (q - pair.p).signum();
    let width = match form {
        ThresholdForm::Printed => (q * (1.0 - q) / nf).sqrt(),
        ThresholdForm::Derived => (nf * q * (1.0 - q)).sqrt(),
    };
    Ok(tolerant_ceil(nf * q + sign * width * z).clamp(0, n as i64 + 1))
}

fn binom_i128(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Binary Krawtchouk polynomial `𝒦_k(X; n) = Σ_m (−1)^m C(X,m) C(n−X,k−m)`.
pub fn krawtchouk(k: usize, x: usize, n: usize) -> Result<i128> {
    if k > n || x > n {
        return Err(invalid(format!("Krawtchouk indices out of range: k={k}, X={x}, n={n}")));
    }
    if n > 120 {
        return Err(invalid("Krawtchouk evaluation limited to n <= 120"));
    }
    Ok((0..=k.min(x))
        .map(|m| {
            let t = binom_i128(x, m) * binom_i128(n - x, k - m);
            if m % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum())
}

/// `2⁻ⁿ Σ_{j ≥ max(m, 0)} 𝒦_j(X; n)`.
fn krawtchouk_tail(n: usize, m: i64, x: usize) -> f64 {
    let start = m.max(0) as usize;
    if start > n {
        return 0.0;
    }
    let s: i128 = (start..=n).map(|j| krawtchouk(j, x, n).expect("indices in range")).sum();
    s as f64 / 2f64.powi(n as i32)
}

/// Per-string threshold `n_*(Ẽ) = ⌈n(Ẽ) + n𝓔/(E₁−E₀)⌉` of the optimal test.
pub fn nstar_for_weight(pair: &QubitPair, n: usize, threshold: f64, weight: usize) -> i64 {
    tolerant_ceil(weight as f64 + n as f64 * threshold / pair.energy_gap())
}

/// `⟨ξ(Ẽ₁)|ξ(Ẽ₂)⟩` at θ = π/4 as a Krawtchouk tail sum.
///
/// With `|0̃⟩ = |−⟩` up to sign, the amplitude `⟨𝐄|Ẽ⟩` carries `(−1)` per
/// position with `(a, ã) = (1, 0)`, so two strings interfere through
/// `Σ_{|𝐄| = j} (−1)^{|𝐄 ∩ (Ẽ₁ ⊕ Ẽ₂)|} = 𝒦_j(|Ẽ₁ ⊕ Ẽ₂|; n)`.
pub fn gram_entry(n: usize, nstar: &dyn Fn(&BitString) -> i64, e1: &BitString, e2: &BitString) -> Result<f64> {
    if e1.n != n || e2.n != n {
        return Err(QhtError::DimensionMismatch {
            expected: n,
            found: if e1.n != n { e1.n } else { e2.n },
        });
    }
    let m = nstar(e1).max(nstar(e2));
    let x = (e1.bits ^ e2.bits).count_ones() as usize;
    Ok(krawtchouk_tail(n, m, x))
}

/// Full `2ⁿ × 2ⁿ` Gram matrix at θ = π/4.
pub fn gram_matrix(n: usize, nstar: &(dyn Fn(&BitString) -> i64 + Sync)) -> Result<nalgebra::DMatrix<f64>> {
    if n > 12 {
        return Err(QhtError::BudgetExceeded {
            what: format!("Gram matrix on 2^{n} strings"),
            limit: 1 << 12,
        });
    }
    let dim = 1usize << n;
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let a = BitString { bits: i as u64, n };
            (0..dim)
                .map(|j| gram_entry(n, nstar, &a, &BitString { bits: j as u64, n }).expect("lengths match"))
                .collect()
        })
        .collect();
    Ok(nalgebra::DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

/// Coefficients `x_{ij}^t` of the Gram matrix in the Terwilliger basis.
#[derive(Clone, Debug)]
pub struct TerwilligerTable {
    pub n: usize,
    pub coefficients: HashMap<(usize, usize, usize), f64>,
}

impl TerwilligerTable {
    /// Gram entry for two strings, read off from `(|X₁|, |X₂|, |X₁ ∩ X₂|)`.
    pub fn entry(&self, e1: &BitString, e2: &BitString) -> f64 {
        let t = (e1.bits & e2.bits).count_ones() as usize;
        self.coefficients[&(e1.weight(), e2.weight(), t)]
    }
}

/// `x_{ij}^t = 2⁻ⁿ Σ_{k ≥ max(n_*(i), n_*(j))} 𝒦_k(i + j − 2t; n)` for thresholds depending only on weight.
pub fn terwilliger_coefficients(n: usize, nstar: &(dyn Fn(usize) -> i64 + Sync)) -> TerwilligerTable {
    let triples: Vec<(usize, usize, usize)> = (0..=n)
        .flat_map(|i| (0..=n).flat_map(move |j| (0..=i.min(j)).map(move |t| (i, j, t))))
        .filter(|&(i, j, t)| i + j - t <= n)
        .collect();
    let coefficients = triples
        .par_iter()
        .map(|&(i, j, t)| ((i, j, t), krawtchouk_tail(n, nstar(i).max(nstar(j)), i + j - 2 * t)))
        .collect();
    TerwilligerTable { n, coefficients }
}

/// Largest n accepted by the circuit simulator.
pub const CIRCUIT_MAX_COPIES: usize = 10;

/// Simulates the counting circuit and returns `Tr ρ_V^{⊗n} P` with `P` the projector on weights `≥ n_*`.
///
/// Qubits `2i` and `2i+1` hold pair `i`; the first of each pair controls a
/// cyclic shift of the unary register on qubits `2n ..= 3n`, which starts in
/// `|1⟩|0⟩ⁿ`. The acceptance probability is the weight of configurations whose
/// first `n_*` register qubits are all `|0⟩`.
pub fn simulate_lrt_circuit(v: &CMat, n: usize, nstar: i64) -> Result<f64> {
    if v.nrows() != 4 || v.ncols() != 4 {
        return Err(QhtError::DimensionMismatch {
            expected: 4,
            found: v.nrows(),
        });
    }
    let defect = unitarity_defect(v);
    if defect > 1e-10 {
        return Err(QhtError::NonUnitary { deviation: defect });
    }
    if n == 0 || n > CIRCUIT_MAX_COPIES {
        return Err(invalid(format!("circuit simulation supports 1 <= n <= {CIRCUIT_MAX_COPIES}")));
    }
    let reg = 2 * n;
    let mut state: HashMap<u64, C64> = HashMap::new();
    state.insert(1u64 << reg, c64(1.0, 0.0));

    for pair in 0..n {
        state = apply_pair_gate(&state, v, 2 * pair, 2 * pair + 1);
    }
    for pair in 0..n {
        let control = 2 * pair;
        let mut next = HashMap::with_capacity(state.len());
        for (&basis, &amp) in &state {
            let target = if (basis >> control) & 1 == 1 {
                cyclic_increment(basis, reg, n + 1)
            } else {
                basis
            };
            *next.entry(target).or_insert(c64(0.0, 0.0)) += amp;
        }
        state = next;
    }
    if nstar <= 0 {
        return Ok(state.values().map(|a| a.norm_sqr()).sum());
    }
    let width = (nstar as usize).min(n + 1);
    let mask = ((1u64 << width) - 1) << reg;
    Ok(state
        .iter()
        .filter(|(&b, _)| b & mask == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Applies a two-qubit gate with `hi` as the more significant index bit.
fn apply_pair_gate(state: &HashMap<u64, C64>, v: &CMat, hi: usize, lo: usize) -> HashMap<u64, C64> {
    let mut next = HashMap::with_capacity(state.len() * 4);
    for (&basis, &amp) in state {
        let col = (((basis >> hi) & 1) << 1 | ((basis >> lo) & 1)) as usize;
        let cleared = basis & !(1u64 << hi) & !(1u64 << lo);
        for row in 0..4 {
            let g = v[(row, col)];
            if g == c64(0.0, 0.0) {
                continue;
            }
            let out = cleared | (((row >> 1) as u64) << hi) | (((row & 1) as u64) << lo);
            *next.entry(out).or_insert(c64(0.0, 0.0)) += g * amp;
        }
    }
    next.retain(|_, a| a.norm_sqr() > 0.0);
    next
}

/// Moves every register bit from position `k` to `k+1 mod len`.
fn cyclic_increment(basis: u64, offset: usize, len: usize) -> u64 {
    let mask = ((1u64 << len) - 1) << offset;
    let r = (basis & mask) >> offset;
    let rotated = ((r << 1) | (r >> (len - 1))) & ((1u64 << len) - 1);
    (basis & !mask) | (rotated << offset)
}

/// Reduced state of the first qubit of `V|00⟩`.
pub fn reduced_first_qubit(v: &CMat) -> Result<DensityMatrix> {
    let mut m = CMat::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                m[(a, b)] += v[(2 * a + k, 0)] * v[(2 * b + k, 0)].conj();
            }
        }
    }
    DensityMatrix::new(crate::numeric::hermitian_part(&m))
}

/// One row of the optimal vs likelihood-ratio comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub beta_opt: f64,
    pub beta_lrt: f64,
    pub alpha_opt: f64,
    pub alpha_lrt: f64,
    pub dim_opt: usize,
    pub dim_lrt: usize,
}

/// Largest n in the comparison table.
pub const COMPARISON_MAX_N: usize = 14;

/// Errors and minimum acceptance dimensions of both tests for `n = 1 ..= n_max`.
pub fn comparison_experiment(theta: f64, p: f64, epsilon: f64, n_max: usize) -> Result<Vec<ComparisonRow>> {
    comparison_with(theta, p, epsilon, n_max, OptimalMethod::Auto)
}

/// Same as [`comparison_experiment`] with an explicit construction route.
pub fn comparison_with(theta: f64, p: f64, epsilon: f64, n_max: usize, method: OptimalMethod) -> Result<Vec<ComparisonRow>> {
    if n_max == 0 || n_max > COMPARISON_MAX_N {
        return Err(invalid(format!("n_max must lie in 1..={COMPARISON_MAX_N}")));
    }
    let pair = QubitPair::new(p, theta)?;
    let setup = pair.setup()?;
    let (rho, sigma) = (pair.rho(), pair.sigma());
    let s = crate::divergences::relative_entropy(&rho, &sigma)?;
    let v = crate::divergences::relative_entropy_variance(&rho, &sigma)?;
    let (sc, vc) = setup.pinched_divergences()?;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let total = 1usize << n;
            let t_opt = threshold_from(s, v, n, epsilon, Mode::Optimal)?;
            let t_lrt = threshold_from(sc, vc, n, epsilon, Mode::Classical)?;
            let opt = optimal_projector(&setup, n, t_opt.value, method)?;
            let lrt = lrt_projector(&setup, n, t_lrt.value)?;
            let eo = setup.errors(&opt)?;
            let el = setup.errors(&lrt)?;
            Ok(ComparisonRow {
                n,
                beta_opt: eo.beta,
                beta_lrt: el.beta,
                alpha_opt: eo.alpha,
                alpha_lrt: el.alpha,
                dim_opt: min_acceptance_dimension(&opt, total),
                dim_lrt: min_acceptance_dimension(&lrt, total),
            })
        })
        .collect()
}
