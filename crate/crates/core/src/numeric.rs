//! Dense Hermitian linear algebra, Gaussian special functions and adaptive quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{invalid, QhtError, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues at or below this value are treated as exact zeros when a logarithm is needed.
pub const LOG_FLOOR: f64 = 1e-14;

/// Absolute Hermiticity tolerance, scaled by the largest entry when that exceeds one.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and the unitary whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `i` of the eigenvector matrix.
    pub fn vector(&self, i: usize) -> CVec {
        self.eigenvectors.column(i).into_owned()
    }

    /// `U diag(f(λ)) U†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.rebuild(&vals)
    }

    /// `U diag(vals) U†` for arbitrary real `vals`.
    pub fn rebuild(&self, vals: &[f64]) -> CMat {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &v) in vals.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.rebuild(&self.eigenvalues)
    }
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise deviation `|M - M†|`.
pub fn max_asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Rejects non-square or non-Hermitian input.
pub fn check_hermitian(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QhtError::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let asym = max_asymmetry(m);
    if asym > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(QhtError::NotHermitian { max_asym: asym });
    }
    Ok(())
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Rotates each column so that its first non-negligible component is real and positive.
pub fn fix_phases(u: &mut CMat) {
    for j in 0..u.ncols() {
        let col_max = u.column(j).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if col_max == 0.0 {
            continue;
        }
        let pivot = u
            .column(j)
            .iter()
            .copied()
            .find(|z| z.norm() > 1e-8 * col_max)
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for i in 0..u.nrows() {
            u[(i, j)] *= phase;
        }
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues and the first-nonzero-component phase convention.
pub fn eig_hermitian(m: &CMat) -> Result<SpectralDecomposition> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMat::zeros(0, 0),
        });
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        eigenvectors.set_column(k, &eig.eigenvectors.column(i));
    }
    fix_phases(&mut eigenvectors);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `U diag(f(λ)) U†`, rejecting eigenvalues below `eigenvalue_floor` when one is given.
pub fn matrix_function(
    m: &CMat,
    f: impl Fn(f64) -> f64,
    eigenvalue_floor: Option<f64>,
) -> Result<CMat> {
    let spec = eig_hermitian(m)?;
    spectral_function(&spec, f, eigenvalue_floor)
}

/// Same as [`matrix_function`] on an existing decomposition.
pub fn spectral_function(
    spec: &SpectralDecomposition,
    f: impl Fn(f64) -> f64,
    eigenvalue_floor: Option<f64>,
) -> Result<CMat> {
    if let Some(floor) = eigenvalue_floor {
        if let Some(&bad) = spec.eigenvalues.iter().find(|&&x| x <= floor) {
            return Err(QhtError::SupportViolation { eigenvalue: bad });
        }
    }
    Ok(spec.apply(f))
}

/// Orthonormal basis (as columns) of the span of the columns of `x`.
///
/// Rank is the number of singular values above `rel_threshold · σ_max`; the
/// default threshold is `dim · ε_machine`.
pub fn orthonormal_span(x: &CMat, rel_threshold: Option<f64>) -> CMat {
    let dim = x.nrows();
    if x.ncols() == 0 || dim == 0 {
        return CMat::zeros(dim, 0);
    }
    let thr = rel_threshold.unwrap_or(dim as f64 * f64::EPSILON);
    let smax = singular_values(x).first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return CMat::zeros(dim, 0);
    }
    span_above(x, thr * smax)
}

/// Thin SVD through LAPACK `zgesvd`: descending singular values and, when asked, the left vectors.
fn lapack_svd(x: &CMat, vectors: bool) -> (Vec<f64>, Option<CMat>) {
    let (r, c) = x.shape();
    let k = r.min(c);
    let mut a = x.clone();
    let mut s = vec![0.0; k];
    let mut u = CMat::zeros(r, if vectors { k } else { 1 });
    let mut vt = [C64::new(0.0, 0.0)];
    let mut rwork = vec![0.0; 5 * k.max(1)];
    let jobu = if vectors { b'S' } else { b'N' } as std::os::raw::c_char;
    let jobvt = b'N' as std::os::raw::c_char;
    let (m, n, lda) = (r as i32, c as i32, r.max(1) as i32);
    let ldu = lda;
    let mut info = 0;
    let mut query = C64::new(0.0, 0.0);
    // SAFETY: buffers are column-major with the leading dimensions passed, and
    // `Complex<f64>` has the same `repr(C)` layout as the LAPACK complex type.
    unsafe {
        lapack_sys::zgesvd_(
            &jobu, &jobvt, &m, &n, a.as_mut_ptr().cast(), &lda, s.as_mut_ptr(),
            u.as_mut_ptr().cast(), &ldu, vt.as_mut_ptr().cast(), &1,
            (&mut query as *mut C64).cast(), &-1, rwork.as_mut_ptr(), &mut info,
        );
        let lwork = (query.re as i32).max(1);
        let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
        lapack_sys::zgesvd_(
            &jobu, &jobvt, &m, &n, a.as_mut_ptr().cast(), &lda, s.as_mut_ptr(),
            u.as_mut_ptr().cast(), &ldu, vt.as_mut_ptr().cast(), &1,
            work.as_mut_ptr().cast(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    assert!(info == 0, "zgesvd failed with info {info}");
    (s, vectors.then_some(u))
}

/// Full real SVD `x = U diag(s) Vᵀ` of a square matrix through LAPACK `dgesvd`, values descending.
pub fn real_svd(x: &nalgebra::DMatrix<f64>) -> (nalgebra::DMatrix<f64>, Vec<f64>, nalgebra::DMatrix<f64>) {
    let l = x.nrows();
    assert_eq!(l, x.ncols(), "real_svd expects a square matrix");
    if l == 0 {
        return (x.clone(), vec![], x.clone());
    }
    let mut a = x.clone();
    let mut s = vec![0.0; l];
    let mut u = nalgebra::DMatrix::<f64>::zeros(l, l);
    let mut vt = nalgebra::DMatrix::<f64>::zeros(l, l);
    let job = b'A' as std::os::raw::c_char;
    let n = l as i32;
    let mut info = 0;
    let mut query = 0.0;
    // SAFETY: all buffers are column-major `l × l` with leading dimension `l`.
    unsafe {
        lapack_sys::dgesvd_(
            &job, &job, &n, &n, a.as_mut_ptr(), &n, s.as_mut_ptr(), u.as_mut_ptr(), &n,
            vt.as_mut_ptr(), &n, &mut query, &-1, &mut info,
        );
        let lwork = (query as i32).max(1);
        let mut work = vec![0.0; lwork as usize];
        lapack_sys::dgesvd_(
            &job, &job, &n, &n, a.as_mut_ptr(), &n, s.as_mut_ptr(), u.as_mut_ptr(), &n,
            vt.as_mut_ptr(), &n, work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    assert!(info == 0, "dgesvd failed with info {info}");
    (u, s, vt)
}

/// Orthonormal basis of the left singular subspace with singular values above `cutoff`.
pub fn span_above(x: &CMat, cutoff: f64) -> CMat {
    let m = x.nrows();
    if x.ncols() == 0 || m == 0 {
        return CMat::zeros(m, 0);
    }
    let (values, u) = lapack_svd(x, true);
    let u = u.expect("requested");
    let rank = values.iter().filter(|&&s| s > cutoff).count();
    u.columns(0, rank).into_owned()
}

/// Singular values of `x` in descending order.
pub fn singular_values(x: &CMat) -> Vec<f64> {
    if x.ncols() == 0 || x.nrows() == 0 {
        return vec![];
    }
    lapack_svd(x, false).0
}

/// Projector onto a span together with its rank.
#[derive(Clone, Debug)]
pub struct RankRevealed {
    pub projector: CMat,
    pub rank: usize,
}

/// Orthogonal projector onto the span of `columns`, computed by SVD rather than Gram–Schmidt.
pub fn rank_revealing_projector(columns: &[CVec], rel_threshold: Option<f64>) -> Result<RankRevealed> {
    let Some(first) = columns.first() else {
        return Ok(RankRevealed {
            projector: CMat::zeros(0, 0),
            rank: 0,
        });
    };
    let dim = first.len();
    if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
        return Err(QhtError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let x = CMat::from_columns(columns);
    let q = orthonormal_span(&x, rel_threshold);
    Ok(RankRevealed {
        rank: q.ncols(),
        projector: &q * q.adjoint(),
    })
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of Φ on the open unit interval.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("normal_quantile needs 0 < p < 1, got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail for accuracy, then reflect.
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let mut x = -statrs::function::erf::erfc_inv(2.0 * q) * std::f64::consts::SQRT_2;
    for _ in 0..3 {
        let step = (normal_cdf(x) - q) / normal_pdf(x);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    Ok(sign * -x)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Maximum number of panel bisections in [`adaptive_quadrature`].
pub const QUADRATURE_MAX_SPLITS: usize = 5000;

/// Globally adaptive 7/15-point Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn adaptive_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(abs_tol > 0.0) {
        return Err(invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total_err = err;
    let mut splits = 0;
    while total_err > abs_tol {
        if splits >= QUADRATURE_MAX_SPLITS {
            return Err(QhtError::QuadratureNonConvergence { residual: total_err });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gauss_kronrod(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, worst.b);
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
        splits += 1;
    }
    // Re-sum to avoid drift from incremental updates.
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Conjugate transpose helper for vectors: `⟨a|b⟩`.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

/// Real matrix to complex.
pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Diagonal complex matrix from real entries.
pub fn diag_real(vals: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Real trace of a (Hermitian) matrix.
pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Operator norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_norm(m: &CMat) -> Result<f64> {
    let spec = eig_hermitian(m)?;
    Ok(spec.eigenvalues.iter().fold(0.0, |a, x| a.max(x.abs())))
}

/// Frobenius norm.
pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deviation of `U†U` from the identity in max norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Binomial coefficient as `f64`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_small()
}

trait RoundSmall {
    fn round_if_small(self) -> Self;
}
impl RoundSmall for f64 {
    fn round_if_small(self) -> Self {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}
