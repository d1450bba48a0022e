//! Density matrices, measurement operators, tensor-power spectra and modular Hamiltonians.

use serde_json::Value;

use crate::error::{invalid, QhtError, Result};
use crate::numeric::{
    check_hermitian, diag_real, eig_hermitian, hermitian_part, trace_re, CMat, CVec,
    SpectralDecomposition, C64, LOG_FLOOR,
};

/// Trace tolerance for a valid state.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a valid state.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Unit-trace positive semidefinite Hermitian matrix with an eagerly computed spectrum.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMat,
    spectral: SpectralDecomposition,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMat) -> Result<Self> {
        check_hermitian(&matrix)?;
        let matrix = hermitian_part(&matrix);
        let tr = trace_re(&matrix);
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(QhtError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let spectral = eig_hermitian(&matrix)?;
        if let Some(&low) = spectral.eigenvalues.first() {
            if low < -NEGATIVITY_TOL {
                return Err(QhtError::InvalidState(format!("negative eigenvalue {low:.3e}")));
            }
        }
        Ok(Self { matrix, spectral })
    }

    /// Normalizes a positive semidefinite matrix by its trace first.
    pub fn from_unnormalized(matrix: CMat) -> Result<Self> {
        check_hermitian(&matrix)?;
        let tr = trace_re(&matrix);
        if !(tr > 0.0) {
            return Err(QhtError::InvalidState("non-positive trace".into()));
        }
        Self::new(matrix.unscale(tr))
    }

    /// Builds the state `U diag(p) U†` with the decomposition taken as given.
    pub fn from_spectral(eigenvalues: Vec<f64>, eigenvectors: CMat) -> Result<Self> {
        let spectral = SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        };
        let sum: f64 = spectral.eigenvalues.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(QhtError::InvalidState(format!("trace {sum} differs from 1")));
        }
        if spectral.eigenvalues.iter().any(|&x| x < -NEGATIVITY_TOL) {
            return Err(QhtError::InvalidState("negative eigenvalue".into()));
        }
        let matrix = spectral.reconstruct();
        let mut order: Vec<usize> = (0..spectral.dim()).collect();
        order.sort_by(|&a, &b| spectral.eigenvalues[a].partial_cmp(&spectral.eigenvalues[b]).unwrap());
        let eigenvalues = order.iter().map(|&i| spectral.eigenvalues[i]).collect();
        let mut vecs = spectral.eigenvectors.clone();
        for (k, &i) in order.iter().enumerate() {
            vecs.set_column(k, &spectral.eigenvectors.column(i));
        }
        Ok(Self {
            matrix,
            spectral: SpectralDecomposition {
                eigenvalues,
                eigenvectors: vecs,
            },
        })
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::new(diag_real(p))
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(QhtError::InvalidState("zero vector".into()));
        }
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim]).expect("valid by construction")
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of eigenvalues above the logarithm floor.
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&x| x > LOG_FLOOR).count()
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new(self.matrix.kronecker(&other.matrix)).expect("product of states")
    }

    /// Serializes as a JSON array of rows of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        matrix_to_json(&self.matrix)
    }

    /// Parses and validates a JSON matrix.
    pub fn from_json(v: &Value) -> Result<Self> {
        Self::new(matrix_from_json(v)?)
    }
}

/// Hermitian operator with spectrum in `[0, 1]`: a binary test.
#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    matrix: CMat,
}

/// Spectral slack allowed when validating a measurement operator.
pub const MEASUREMENT_TOL: f64 = 1e-10;

impl MeasurementOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        check_hermitian(&matrix)?;
        let matrix = hermitian_part(&matrix);
        let spec = eig_hermitian(&matrix)?;
        if let (Some(&lo), Some(&hi)) = (spec.eigenvalues.first(), spec.eigenvalues.last()) {
            if lo < -MEASUREMENT_TOL || hi > 1.0 + MEASUREMENT_TOL {
                return Err(invalid(format!(
                    "measurement spectrum [{lo:.3e}, {hi:.3e}] outside [0, 1]"
                )));
            }
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMat::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMat::zeros(dim, dim),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Type-I error `Tr ρ(1 − A)`.
    pub fn alpha(&self, rho: &DensityMatrix) -> f64 {
        1.0 - expectation(&self.matrix, rho)
    }

    /// Type-II error `Tr σA`.
    pub fn beta(&self, sigma: &DensityMatrix) -> f64 {
        expectation(&self.matrix, sigma)
    }
}

/// `Re Tr(ρ X)`.
pub fn expectation(x: &CMat, rho: &DensityMatrix) -> f64 {
    crate::numeric::trace_product(rho.matrix(), x).re
}

/// Single-copy eigenstate indices labelling a product basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorBasisLabel {
    pub indices: Vec<usize>,
}

impl TensorBasisLabel {
    /// Lexicographic position of the label among all `dimⁿ` labels.
    pub fn position(&self, dim: usize) -> usize {
        self.indices.iter().fold(0, |acc, &i| acc * dim + i)
    }

    pub fn from_position(mut pos: usize, dim: usize, n: usize) -> Self {
        let mut indices = vec![0; n];
        for slot in indices.iter_mut().rev() {
            *slot = pos % dim;
            pos /= dim;
        }
        Self { indices }
    }
}

/// `K = −log ρ` for a full-rank state.
#[derive(Clone, Debug)]
pub struct ModularHamiltonian {
    pub matrix: CMat,
}

/// Cap on the number of product labels, as a power of two.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_log2_labels: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_log2_labels: 24 }
    }
}

impl Budget {
    /// `dimⁿ` if it is within the cap.
    pub fn labels(&self, dim: usize, n: usize) -> Result<usize> {
        let limit = 1u64 << self.max_log2_labels;
        let mut count: u64 = 1;
        for _ in 0..n {
            count = count.saturating_mul(dim as u64);
            if count > limit {
                return Err(QhtError::BudgetExceeded {
                    what: format!("{dim}^{n} product labels"),
                    limit,
                });
            }
        }
        Ok(count as usize)
    }
}

/// `e^{−βH}/Tr e^{−βH}`.
pub fn thermal_state(h: &CMat, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0) {
        return Err(invalid(format!("inverse temperature must be >= 0, got {beta}")));
    }
    let spec = eig_hermitian(h)?;
    let shift = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&e| (-beta * (e - shift)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let p: Vec<f64> = weights.iter().map(|w| w / z).collect();
    DensityMatrix::from_spectral(p, spec.eigenvectors)
}

/// Traces out every factor not listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(QhtError::DimensionMismatch {
            expected: rho.dim(),
            found: total,
        });
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(invalid("kept subsystem index out of range"));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let kdims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |digits_k: &[usize], digits_t: &[usize]| -> usize {
        let mut idx = 0;
        for (pos, &sub) in keep_sorted.iter().enumerate() {
            idx += digits_k[pos] * strides[sub];
        }
        for (pos, &sub) in traced.iter().enumerate() {
            idx += digits_t[pos] * strides[sub];
        }
        idx
    };
    let digits = |mut x: usize, ds: &[usize]| -> Vec<usize> {
        let mut out = vec![0; ds.len()];
        for i in (0..ds.len()).rev() {
            out[i] = x % ds[i];
            x /= ds[i];
        }
        out
    };
    let m = rho.matrix();
    let mut out = CMat::zeros(kd, kd);
    for a in 0..kd {
        let da = digits(a, &kdims);
        for b in 0..kd {
            let db = digits(b, &kdims);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                let dt = digits(t, &tdims);
                acc += m[(offset(&da, &dt), offset(&db, &dt))];
            }
            out[(a, b)] = acc;
        }
    }
    DensityMatrix::new(out)
}

/// Diagonal weights `⟨E_k|ρ|E_k⟩` in the supplied basis.
pub fn pinched_weights(rho: &DensityMatrix, basis: &SpectralDecomposition) -> Result<Vec<f64>> {
    if basis.dim() != rho.dim() {
        return Err(QhtError::DimensionMismatch {
            expected: rho.dim(),
            found: basis.dim(),
        });
    }
    Ok((0..basis.dim())
        .map(|k| {
            let v = basis.vector(k);
            v.dotc(&(rho.matrix() * &v)).re
        })
        .collect())
}

/// `ρ_D`: the part of `ρ` diagonal in the eigenbasis of σ.
pub fn pinch_diagonal(rho: &DensityMatrix, basis: &SpectralDecomposition) -> Result<DensityMatrix> {
    let w = pinched_weights(rho, basis)?;
    DensityMatrix::from_spectral(w, basis.eigenvectors.clone())
}

/// Lexicographic stream of product labels with their average modular energy `|𝐄| = (1/n)Σ Eᵢ`.
pub struct TensorPowerSpectrum {
    energies: Vec<f64>,
    n: usize,
    next: usize,
    total: usize,
}

impl Iterator for TensorPowerSpectrum {
    type Item = (TensorBasisLabel, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let label = TensorBasisLabel::from_position(self.next, self.energies.len(), self.n);
        self.next += 1;
        let sum: f64 = label.indices.iter().map(|&i| self.energies[i]).sum();
        Some((label, sum / self.n as f64))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

/// Enumerates `ρ^{⊗n}` eigen-labels; kernel eigenvalues carry infinite energy.
pub fn tensor_power_spectrum(rho: &DensityMatrix, n: usize, budget: Budget) -> Result<TensorPowerSpectrum> {
    if n == 0 {
        return Err(invalid("number of copies must be positive"));
    }
    let total = budget.labels(rho.dim(), n)?;
    let energies = rho
        .eigenvalues()
        .iter()
        .map(|&p| if p > 0.0 { -p.ln() } else { f64::INFINITY })
        .collect();
    Ok(TensorPowerSpectrum {
        energies,
        n,
        next: 0,
        total,
    })
}

/// `K = −log ρ`.
pub fn modular_hamiltonian(rho: &DensityMatrix) -> Result<ModularHamiltonian> {
    let matrix = crate::numeric::spectral_function(rho.spectral(), |x| -x.ln(), Some(LOG_FLOOR))?;
    Ok(ModularHamiltonian { matrix })
}

/// Writes a complex matrix as rows of `[re, im]` pairs.
pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Reads a square complex matrix written by [`matrix_to_json`].
pub fn matrix_from_json(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| invalid("matrix must be a JSON array"))?;
    let n = rows.len();
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| invalid("matrix row must be an array"))?;
        if row.len() != n {
            return Err(QhtError::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| invalid("entries must be [re, im] pairs"))?;
            let re = pair[0].as_f64().ok_or_else(|| invalid("non-numeric entry"))?;
            let im = pair[1].as_f64().ok_or_else(|| invalid("non-numeric entry"))?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c64;

    #[test]
    fn thermal_closed_form() {
        let h = diag_real(&[0.0, 1.0]);
        let s = thermal_state(&h, 3f64.ln()).unwrap();
        assert!((s.matrix()[(0, 0)].re - 0.75).abs() < 1e-14);
        assert!((s.matrix()[(1, 1)].re - 0.25).abs() < 1e-14);
        let mm = thermal_state(&diag_real(&[0.3, -2.0, 5.0]), 0.0).unwrap();
        for i in 0..3 {
            assert!((mm.matrix()[(i, i)].re - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!(thermal_state(&h, -1.0).is_err());
    }

    #[test]
    fn partial_trace_of_chi() {
        let s = 1.0 / 3f64.sqrt();
        let chi = CVec::from_vec(vec![c64(0.0, 0.0), c64(s, 0.0), c64(s, 0.0), c64(s, 0.0)]);
        let rho = DensityMatrix::pure(&chi).unwrap();
        let a = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        let expect = [[1.0, 1.0], [1.0, 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.matrix()[(i, j)] - c64(expect[i][j] / 3.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn modular_hamiltonian_diag() {
        let k = modular_hamiltonian(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()).unwrap();
        assert!((k.matrix[(0, 0)].re - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((k.matrix[(1, 1)].re - 4f64.ln()).abs() < 1e-14);
        assert!(modular_hamiltonian(&DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn spectrum_two_copies() {
        let rho = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let e: Vec<f64> = tensor_power_spectrum(&rho, 2, Budget::default())
            .unwrap()
            .map(|(_, e)| e)
            .collect();
        let (e0, e1) = (-(0.3f64).ln(), -(0.7f64).ln());
        // Ascending eigenvalue order puts 0.3 first.
        assert!((e[0] - e0).abs() < 1e-14);
        assert!((e[1] - 0.5 * (e0 + e1)).abs() < 1e-14);
        assert!((e[2] - 0.5 * (e0 + e1)).abs() < 1e-14);
        assert!((e[3] - e1).abs() < 1e-14);
        assert!(tensor_power_spectrum(&rho, 25, Budget::default()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rho = DensityMatrix::from_diagonal(&[0.6, 0.4]).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() == 0.0);
        let bad = serde_json::json!([[[2.0, 0.0]]]);
        assert!(DensityMatrix::from_json(&bad).is_err());
    }
}
