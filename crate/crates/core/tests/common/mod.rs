//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qht_core::numeric::{c64, eig_hermitian};
use qht_core::{CMat, CVec, DensityMatrix, C64};
use rand::Rng;

pub type RMat = DMatrix<f64>;

/// Least-squares line through `(x, y)`: slope, intercept and R².
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Classical Kullback-Leibler divergence.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// Variance of `log(p/q)` under `p`.
pub fn kl_variance(p: &[f64], q: &[f64]) -> f64 {
    let s = kl(p, q);
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * ((a / b).ln() - s).powi(2))
        .sum()
}

/// `Tr ρ(log ρ − log σ)` from eigendecompositions, restricted to full-rank σ.
pub fn relative_entropy_dense(rho: &CMat, sigma: &CMat) -> f64 {
    let log = |m: &CMat| {
        let s = eig_hermitian(m).unwrap();
        s.apply(|x| if x > 1e-300 { x.ln() } else { 0.0 })
    };
    let d = rho.nrows();
    let diff = log(rho) - log(sigma);
    (0..d).map(|i| (rho * &diff)[(i, i)].re).sum()
}

/// `m^{⊗n}` by repeated Kronecker products.
pub fn tensor_power(m: &CMat, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(m);
    }
    out
}

/// Projector onto the span of the columns, via the eigenvalues of `X X†` with a relative cutoff.
///
/// Independent of the library span routine; accurate to about `√ε` in the cutoff,
/// which is enough when the spectrum has a clean gap.
pub fn span_projector(x: &CMat, rel: f64) -> (CMat, usize) {
    let g = x * x.adjoint();
    let g = (&g + g.adjoint()).scale(0.5);
    let eig = g.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = (rel.max(1e-7) * lmax.sqrt()).powi(2);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > cut)
        .collect();
    let mut q = CMat::zeros(x.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        q.set_column(k, &eig.eigenvectors.column(i));
    }
    (&q * q.adjoint(), keep.len())
}

/// Dense optimal measurement: the span of `ξ(Ẽ) = Σ_{E accepted} ⟨E|Ẽ⟩|E⟩`.
///
/// Works in σ's eigenbasis with σ's eigenvalues `s` and ρ's eigenvalues `r`,
/// and `u[(a, b)] = ⟨e_a|ẽ_b⟩`. Returns the projector and the errors `(α, β)`.
pub fn dense_optimal(s: &[f64], r: &[f64], u: &CMat, n: usize, n_threshold: f64) -> (CMat, f64, f64) {
    let d = s.len();
    let dim = d.pow(n as u32);
    let label = |mut p: usize| {
        let mut v = vec![0usize; n];
        for k in (0..n).rev() {
            v[k] = p % d;
            p /= d;
        }
        v
    };
    let energy = |l: &[usize], w: &[f64]| -> f64 { l.iter().map(|&i| -w[i].ln()).sum() };
    let mut cols = vec![];
    for b in 0..dim {
        let lb = label(b);
        if lb.iter().any(|&i| r[i] <= 0.0) {
            continue;
        }
        let et = energy(&lb, r);
        let mut col = CVec::zeros(dim);
        for a in 0..dim {
            let la = label(a);
            let e = energy(&la, s);
            if e - et >= n_threshold - 1e-9 * n_threshold.abs().max(1.0) {
                col[a] = la.iter().zip(&lb).map(|(&x, &y)| u[(x, y)]).product();
            }
        }
        cols.push(col);
    }
    let x = if cols.is_empty() {
        CMat::zeros(dim, 1)
    } else {
        CMat::from_columns(&cols)
    };
    let (p, _) = span_projector(&x, (dim as f64) * f64::EPSILON);
    let sigma1 = qht_core::numeric::diag_real(s);
    let rho1 = u * qht_core::numeric::diag_real(r) * u.adjoint();
    let sn = tensor_power(&sigma1, n);
    let rn = tensor_power(&rho1, n);
    let tr = |a: &CMat, b: &CMat| (a * b).trace().re;
    let alpha = 1.0 - tr(&rn, &p);
    let beta = tr(&sn, &p);
    (p, alpha, beta)
}

/// Rank of a Hermitian projector.
pub fn projector_rank(p: &CMat) -> usize {
    p.trace().re.round() as usize
}

/// `Tr ρ_V^{⊗n}P`, with `ρ_V` the first-qubit marginal of `V|00⟩` and `P`
/// the projector on computational strings of weight at least `n_*`.
pub fn circuit_trace(v: &CMat, n: usize, nstar: i64) -> f64 {
    let psi: Vec<C64> = (0..4).map(|i| v[(i, 0)]).collect();
    let mut rho = CMat::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            rho[(a, b)] = psi[2 * a] * psi[2 * b].conj() + psi[2 * a + 1] * psi[2 * b + 1].conj();
        }
    }
    let rn = tensor_power(&rho, n);
    (0..1usize << n)
        .filter(|&k| k.count_ones() as i64 >= nstar)
        .map(|k| rn[(k, k)].re)
        .sum()
}

/// Fock-space annihilation operators; site 0 is the most significant bit and
/// carries no string, later sites pick up `(−1)` per occupied earlier site.
pub fn fock_annihilators(l: usize) -> Vec<RMat> {
    let dim = 1usize << l;
    (0..l)
        .map(|i| {
            let mut m = RMat::zeros(dim, dim);
            for s in 0..dim {
                let bit = 1usize << (l - 1 - i);
                if s & bit != 0 {
                    let mut sign = 1.0;
                    for k in 0..i {
                        if s & (1 << (l - 1 - k)) != 0 {
                            sign = -sign;
                        }
                    }
                    m[(s ^ bit, s)] = sign;
                }
            }
            m
        })
        .collect()
}

/// Dense Gibbs state `e^{−K}/Z` of `K = Σ A_ij ψ†_i ψ_j`.
pub fn fock_gaussian(a: &RMat) -> CMat {
    let l = a.nrows();
    let psi = fock_annihilators(l);
    let dim = 1usize << l;
    let mut k = RMat::zeros(dim, dim);
    for i in 0..l {
        for j in 0..l {
            k += psi[i].transpose() * &psi[j] * a[(i, j)];
        }
    }
    let spec = eig_hermitian(&k.map(|x| c64(x, 0.0))).unwrap();
    let e0 = spec.eigenvalues[0];
    let m = spec.apply(|x| (-(x - e0)).exp());
    let z = m.trace().re;
    m.unscale(z)
}

/// Random symmetric correlation matrix with spectrum in `[lo, hi]`.
pub fn random_correlation<R: Rng>(rng: &mut R, l: usize, lo: f64, hi: f64) -> RMat {
    let o = qht_core::random::haar_orthogonal(rng, l);
    let vals = DVector::from_iterator(l, (0..l).map(|_| rng.random_range(lo..hi)));
    &o * RMat::from_diagonal(&vals) * o.transpose()
}

/// `A = log((1 − C)/C)` by eigendecomposition.
pub fn modular_of(c: &RMat) -> RMat {
    let e = nalgebra::SymmetricEigen::new(c.clone());
    let d = e.eigenvalues.map(|x| ((1.0 - x) / x).ln());
    &e.eigenvectors * RMat::from_diagonal(&d) * e.eigenvectors.transpose()
}

/// `⟨E_I|Ẽ_J⟩` in the dense Fock space, with `E` the site basis and `Ẽ` built
/// from `c̃ = T₁₁ψ + T₁₂ψ†` acting on its normalized vacuum of positive overlap.
pub struct WickOracle {
    psi: Vec<RMat>,
    ct: Vec<RMat>,
    vacuum: DVector<f64>,
}

impl WickOracle {
    pub fn new(t: &RMat) -> Self {
        let l = t.nrows() / 2;
        let psi = fock_annihilators(l);
        let dim = 1usize << l;
        let ct: Vec<RMat> = (0..l)
            .map(|k| {
                let mut m = RMat::zeros(dim, dim);
                for j in 0..l {
                    m += &psi[j] * t[(k, j)] + psi[j].transpose() * t[(k, l + j)];
                }
                m
            })
            .collect();
        // The vacuum spans the kernel of Σ_k c̃_k† c̃_k.
        let mut number = RMat::zeros(dim, dim);
        for m in &ct {
            number += m.transpose() * m;
        }
        let eig = nalgebra::SymmetricEigen::new(number);
        let (imin, lmin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc });
        assert!(lmin.abs() < 1e-10, "no common vacuum");
        let mut vacuum: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
        if vacuum[0] < 0.0 {
            vacuum = -vacuum;
        }
        Self { psi, ct, vacuum }
    }

    pub fn vacuum_overlap(&self) -> f64 {
        self.vacuum[0]
    }

    pub fn overlap(&self, creation: &[usize], annihilation: &[usize]) -> f64 {
        let dim = self.vacuum.len();
        let mut ket = self.vacuum.clone();
        for &j in creation.iter().rev() {
            ket = self.ct[j].transpose() * ket;
        }
        let mut bra = DVector::zeros(dim);
        bra[0] = 1.0;
        for &i in annihilation.iter().rev() {
            bra = self.psi[i].transpose() * bra;
        }
        bra.dot(&ket)
    }
}

/// All strictly increasing index lists drawn from `0..l`.
pub fn subsets(l: usize) -> Vec<Vec<usize>> {
    (0..1usize << l)
        .map(|m| (0..l).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

/// Density matrix from a real diagonal.
pub fn diag_state(p: &[f64]) -> DensityMatrix {
    DensityMatrix::from_diagonal(p).unwrap()
}
