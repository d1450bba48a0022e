//! Single-copy tests: qubit Bloch geometry and a general Neyman–Pearson solver.

use serde::Serialize;

use crate::error::{invalid, QhtError, Result};
use crate::numeric::{eig_hermitian, CMat, C64};
use crate::states::{expectation, DensityMatrix, MeasurementOperator};

/// Four-vector `(c₁, c₂, c₃, c₄)`; a state is `½(a⃗·σ⃗ + a₄)` and a test is `c⃗·σ⃗ + c₄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochFourVector {
    pub c: [f64; 4],
}

impl BlochFourVector {
    pub fn new(c: [f64; 4]) -> Self {
        Self { c }
    }

    /// Length of the spatial part.
    pub fn radius(&self) -> f64 {
        (self.c[0] * self.c[0] + self.c[1] * self.c[1] + self.c[2] * self.c[2]).sqrt()
    }

    /// `c₄ = 1` and `|c⃗| ≤ 1`.
    pub fn is_state(&self) -> bool {
        (self.c[3] - 1.0).abs() < 1e-12 && self.radius() <= 1.0 + 1e-12
    }

    /// `0 ≤ c₄ ≤ 1` and `|c⃗| ≤ min(c₄, 1 − c₄)`.
    pub fn is_test(&self) -> bool {
        let c4 = self.c[3];
        (-1e-12..=1.0 + 1e-12).contains(&c4) && self.radius() <= c4.min(1.0 - c4) + 1e-12
    }

    /// The density matrix `½(a⃗·σ⃗ + a₄·1)`.
    pub fn state(&self) -> Result<DensityMatrix> {
        if !self.is_state() {
            return Err(QhtError::InvalidState(format!("{:?} is not a Bloch state", self.c)));
        }
        DensityMatrix::new(pauli_combination(&self.c).scale(0.5))
    }

    /// `Tr ρA = a⃗·c⃗ + a₄c₄` for a state `self` and test `test`.
    pub fn pairing(&self, test: &BlochFourVector) -> f64 {
        (0..4).map(|i| self.c[i] * test.c[i]).sum()
    }
}

fn pauli_combination(c: &[f64; 4]) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            C64::new(c[3] + c[2], 0.0),
            C64::new(c[0], -c[1]),
            C64::new(c[0], c[1]),
            C64::new(c[3] - c[2], 0.0),
        ],
    )
}

fn require_qubit(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(QhtError::DimensionMismatch { expected: 2, found: dim });
    }
    Ok(())
}

/// Bloch four-vector of a qubit state (`a₄ = 1`, |0⟩ is the +1 eigenvector of σ³).
pub fn bloch_of(rho: &DensityMatrix) -> Result<BlochFourVector> {
    require_qubit(rho.dim())?;
    let m = rho.matrix();
    Ok(BlochFourVector::new([
        2.0 * m[(1, 0)].re,
        2.0 * m[(1, 0)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
        (m[(0, 0)] + m[(1, 1)]).re,
    ]))
}

/// Four-vector of a qubit test operator `A = c⃗·σ⃗ + c₄`.
pub fn bloch_of_operator(a: &MeasurementOperator) -> Result<BlochFourVector> {
    require_qubit(a.dim())?;
    let m = a.matrix();
    Ok(BlochFourVector::new([
        m[(1, 0)].re,
        m[(1, 0)].im,
        0.5 * (m[(0, 0)] - m[(1, 1)]).re,
        0.5 * (m[(0, 0)] + m[(1, 1)]).re,
    ]))
}

/// The operator `c⃗·σ⃗ + c₄·1`, validated as a test.
pub fn operator_of(c: &BlochFourVector) -> Result<MeasurementOperator> {
    if !c.is_test() {
        return Err(invalid(format!("{:?} lies outside the test diamond", c.c)));
    }
    MeasurementOperator::new(pauli_combination(&c.c))
}

/// Optimal symmetric qubit test `c₄ = ½`, `c⃗ = (a⃗ − b⃗)/(2|a⃗ − b⃗|)` and its error `½(α + β)`.
pub fn symmetric_oneshot_qubit(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(MeasurementOperator, f64)> {
    let a = bloch_of(rho)?;
    let b = bloch_of(sigma)?;
    let diff = [a.c[0] - b.c[0], a.c[1] - b.c[1], a.c[2] - b.c[2]];
    let norm = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt();
    if norm < 1e-14 {
        return Err(invalid("identical states cannot be discriminated"));
    }
    let c = BlochFourVector::new([
        diff[0] / (2.0 * norm),
        diff[1] / (2.0 * norm),
        diff[2] / (2.0 * norm),
        0.5,
    ]);
    let test = operator_of(&c)?;
    let alpha = 1.0 - a.pairing(&c);
    let beta = b.pairing(&c);
    Ok((test, 0.5 * (alpha + beta)))
}

/// Optimal asymmetric test at type-I budget ε.
#[derive(Clone, Debug)]
pub struct NeymanPearson {
    pub test: MeasurementOperator,
    pub alpha: f64,
    pub beta: f64,
    /// Multiplier in `ρ − tσ`; infinite when the test is the projector onto ker σ.
    pub t: f64,
    /// Weight on the kernel of `ρ − tσ`.
    pub gamma: f64,
}

/// Relative tolerance for zero eigenvalues of `ρ − tσ`.
const ZERO_TOL: f64 = 1e-10;

struct Split {
    plus: CMat,
    zero: CMat,
}

fn split(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<Split> {
    let m = rho.matrix() - sigma.matrix().scale(t);
    let spec = eig_hermitian(&m)?;
    let tol = ZERO_TOL * (1.0 + t);
    let plus = spec.apply(|x| if x > tol { 1.0 } else { 0.0 });
    let zero = spec.apply(|x| if x.abs() <= tol { 1.0 } else { 0.0 });
    Ok(Split { plus, zero })
}

/// Generalized eigenvalue breakpoints `t ≥ 0` where `ρ − tσ` acquires a kernel on supp(ρ + σ).
pub fn breakpoints(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Vec<f64>> {
    let m = rho.matrix() + sigma.matrix();
    let spec = eig_hermitian(&m)?;
    let d = rho.dim();
    let support: Vec<usize> = (0..d).filter(|&i| spec.eigenvalues[i] > 1e-13).collect();
    let mut n = CMat::zeros(d, support.len());
    for (k, &i) in support.iter().enumerate() {
        n.set_column(k, &spec.vector(i).unscale(spec.eigenvalues[i].sqrt()));
    }
    let s = n.adjoint() * sigma.matrix() * &n;
    let mu = eig_hermitian(&crate::numeric::hermitian_part(&s))?;
    let mut ts: Vec<f64> = mu
        .eigenvalues
        .iter()
        .filter(|&&x| x > 1e-14)
        .map(|&x| (1.0 / x - 1.0).max(0.0))
        .collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    Ok(ts)
}

/// Minimizes `Tr σA` subject to `Tr ρ(1 − A) ≤ ε` over `A = P₊(ρ − tσ) + γP₀(ρ − tσ)`.
pub fn neyman_pearson(rho: &DensityMatrix, sigma: &DensityMatrix, epsilon: f64) -> Result<NeymanPearson> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if rho.dim() != sigma.dim() {
        return Err(QhtError::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let target = 1.0 - epsilon;
    let h = |sp: &Split| expectation(&sp.plus, rho);
    let finish = |test: CMat, t: f64, gamma: f64| -> NeymanPearson {
        let test = MeasurementOperator::new_unchecked(crate::numeric::hermitian_part(&test));
        NeymanPearson {
            alpha: test.alpha(rho),
            beta: test.beta(sigma),
            test,
            t,
            gamma,
        }
    };
    let ts = breakpoints(rho, sigma)?;
    let mut left = 0.0;
    for &t in &ts {
        let sp = split(rho, sigma, t)?;
        let plus = h(&sp);
        if plus <= target {
            let zero = expectation(&sp.zero, rho);
            if plus + zero >= target {
                let gamma = if zero > 0.0 { ((target - plus) / zero).clamp(0.0, 1.0) } else { 0.0 };
                return Ok(finish(&sp.plus + sp.zero.scale(gamma), t, gamma));
            }
            return bisect(rho, sigma, left, t, target).map(|(a, t)| finish(a, t, 0.0));
        }
        left = t;
    }
    // Beyond the last breakpoint P₊ tends to the projector onto ker σ.
    let ker = sigma.spectral().apply(|x| if x <= 1e-13 { 1.0 } else { 0.0 });
    if expectation(&ker, rho) >= target - 1e-15 {
        return Ok(finish(ker, f64::INFINITY, 0.0));
    }
    let mut right = left.max(1.0) * 2.0;
    while h(&split(rho, sigma, right)?) >= target {
        right *= 2.0;
        if right > 1e300 {
            return Ok(finish(ker, f64::INFINITY, 0.0));
        }
    }
    bisect(rho, sigma, left, right, target).map(|(a, t)| finish(a, t, 0.0))
}

/// Largest `t` in `(lo, hi)` with `Tr ρP₊(ρ − tσ) ≥ target`, where the map is continuous.
fn bisect(rho: &DensityMatrix, sigma: &DensityMatrix, mut lo: f64, mut hi: f64, target: f64) -> Result<(CMat, f64)> {
    let mut best = split(rho, sigma, lo)?.plus;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let sp = split(rho, sigma, mid)?;
        if expectation(&sp.plus, rho) >= target {
            lo = mid;
            best = sp.plus;
        } else {
            hi = mid;
        }
    }
    Ok((best, lo))
}

/// `D_H^ε(ρ‖σ) = −log β*`.
pub fn hypothesis_testing_relent(rho: &DensityMatrix, sigma: &DensityMatrix, epsilon: f64) -> Result<f64> {
    let np = neyman_pearson(rho, sigma, epsilon)?;
    Ok(if np.beta <= 0.0 { f64::INFINITY } else { -np.beta.ln() })
}
