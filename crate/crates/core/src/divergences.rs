//! Single-copy distinguishability measures: relative entropy and its variance,
//! Rényi families, Chernoff information, trace distance and fidelity.
//!
//! Quantities that pair the spectra of ρ and σ are evaluated through the
//! overlap weights `W_ij = |⟨ψ_i|φ_j⟩|²` between the two eigenbases, which keeps
//! support handling explicit and avoids forming matrix logarithms.

use serde::Serialize;

use crate::error::{invalid, QhtError, Result};
use crate::numeric::{eig_hermitian, singular_values, spectral_function, CMat, LOG_FLOOR};
use crate::states::DensityMatrix;

/// Weight a support eigenvector of ρ may place on ker σ before the support condition fails.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Tolerance of the vanishing-variance predicate.
pub const VANISHING_TOL: f64 = 1e-9;

/// Optimum of the Chernoff exponent.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChernoffResult {
    pub s_star: f64,
    pub neg_log_q: f64,
    pub q: f64,
}

/// How supp ρ sits relative to supp σ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportRelation {
    /// supp ρ ⊆ supp σ.
    Contained,
    /// supp ρ ⊆ ker σ.
    InKernel,
    /// Neither of the above.
    Partial,
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(QhtError::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// `W[i][j] = |⟨ψ_i|φ_j⟩|²` with ψ from ρ and φ from σ.
pub fn overlap_weights(rho: &DensityMatrix, sigma: &DensityMatrix) -> Vec<Vec<f64>> {
    let o = rho.spectral().eigenvectors.adjoint() * &sigma.spectral().eigenvectors;
    (0..o.nrows())
        .map(|i| (0..o.ncols()).map(|j| o[(i, j)].norm_sqr()).collect())
        .collect()
}

/// Classifies supp ρ against supp σ.
pub fn support_relation(rho: &DensityMatrix, sigma: &DensityMatrix) -> SupportRelation {
    let w = overlap_weights(rho, sigma);
    let s = sigma.eigenvalues();
    let p = rho.eigenvalues();
    let mut all_in_support = true;
    let mut all_in_kernel = true;
    for (i, row) in w.iter().enumerate() {
        if p[i] <= LOG_FLOOR {
            continue;
        }
        let ker: f64 = row
            .iter()
            .zip(s)
            .filter(|(_, &sj)| sj <= LOG_FLOOR)
            .map(|(x, _)| x)
            .sum();
        if ker > SUPPORT_TOL {
            all_in_support = false;
        }
        if 1.0 - ker > SUPPORT_TOL {
            all_in_kernel = false;
        }
    }
    if all_in_support {
        SupportRelation::Contained
    } else if all_in_kernel {
        SupportRelation::InKernel
    } else {
        SupportRelation::Partial
    }
}

/// `S(ρ‖σ) = Tr ρ(log ρ − log σ)`, or `+∞` when supp ρ ⊄ supp σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    if support_relation(rho, sigma) != SupportRelation::Contained {
        return Ok(f64::INFINITY);
    }
    let w = overlap_weights(rho, sigma);
    Ok(relent_from_weights(rho.eigenvalues(), sigma.eigenvalues(), &w, false))
}

fn log_plus(s: f64) -> f64 {
    if s > LOG_FLOOR {
        s.ln()
    } else {
        0.0
    }
}

fn relent_from_weights(p: &[f64], s: &[f64], w: &[Vec<f64>], include_kernel: bool) -> f64 {
    let mut total = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi <= LOG_FLOOR {
            continue;
        }
        let mut m = 0.0;
        for (j, &sj) in s.iter().enumerate() {
            if sj > LOG_FLOOR || include_kernel {
                m += w[i][j] * log_plus(sj);
            }
        }
        total += pi * (pi.ln() - m);
    }
    total
}

/// `V(ρ‖σ) = Tr ρ(log ρ − log σ)² − S(ρ‖σ)²`.
///
/// When supp ρ lies entirely in ker σ the value is the `σ + ε·1`, `ε → 0`
/// limit, in which the divergent `log ε` shift drops out of the variance.
/// Partial overlap with ker σ has no finite limit and is rejected.
pub fn relative_entropy_variance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let include_kernel = match support_relation(rho, sigma) {
        SupportRelation::Contained => false,
        SupportRelation::InKernel => true,
        SupportRelation::Partial => {
            let bad = sigma
                .eigenvalues()
                .iter()
                .copied()
                .find(|&x| x <= LOG_FLOOR)
                .unwrap_or(0.0);
            return Err(QhtError::SupportViolation { eigenvalue: bad });
        }
    };
    let w = overlap_weights(rho, sigma);
    let p = rho.eigenvalues();
    let s = sigma.eigenvalues();
    let mean = relent_from_weights(p, s, &w, include_kernel);
    let mut var = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi <= LOG_FLOOR {
            continue;
        }
        let a = pi.ln() - mean;
        for (j, &sj) in s.iter().enumerate() {
            if sj > LOG_FLOOR || include_kernel {
                let d = a - log_plus(sj);
                var += pi * w[i][j] * d * d;
            }
        }
    }
    Ok(var)
}

/// `x^a` restricted to the support (eigenvalues above the floor); `a = 0` gives the support projector.
fn support_power(rho: &DensityMatrix, a: f64) -> CMat {
    rho.spectral()
        .apply(|x| if x > LOG_FLOOR { x.powf(a) } else { 0.0 })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(invalid(format!("Rényi order must be positive and != 1, got {alpha}")));
    }
    Ok(())
}

/// `Tr ρ^α σ^{1−α}`, with `+∞` when α > 1 and the support condition fails.
pub fn petz_q(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_dims(rho, sigma)?;
    if alpha > 1.0 && support_relation(rho, sigma) != SupportRelation::Contained {
        return Ok(f64::INFINITY);
    }
    let w = overlap_weights(rho, sigma);
    let p = rho.eigenvalues();
    let s = sigma.eigenvalues();
    let mut q = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi <= LOG_FLOOR {
            continue;
        }
        for (j, &sj) in s.iter().enumerate() {
            if sj > LOG_FLOOR {
                q += w[i][j] * pi.powf(alpha) * sj.powf(1.0 - alpha);
            }
        }
    }
    Ok(q)
}

/// Petz–Rényi divergence `D_α = log(Tr ρ^α σ^{1−α})/(α − 1)`.
pub fn petz_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let q = petz_q(rho, sigma, alpha)?;
    Ok(log_ratio(q, alpha))
}

fn log_ratio(q: f64, alpha: f64) -> f64 {
    if q.is_infinite() || q <= 0.0 {
        return f64::INFINITY;
    }
    q.ln() / (alpha - 1.0)
}

/// `Tr[(σ^γ ρ σ^γ)^α]` with `γ = (1−α)/2α`; defined at α = 1 as `Tr P_σ ρ`.
pub fn sandwiched_q(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_dims(rho, sigma)?;
    if !(alpha > 0.0) {
        return Err(invalid("Rényi order must be positive"));
    }
    if alpha > 1.0 && support_relation(rho, sigma) != SupportRelation::Contained {
        return Ok(f64::INFINITY);
    }
    let gamma = (1.0 - alpha) / (2.0 * alpha);
    let sg = support_power(sigma, gamma);
    let inner = &sg * rho.matrix() * &sg;
    let spec = eig_hermitian(&crate::numeric::hermitian_part(&inner))?;
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x.powf(alpha))
        .sum())
}

/// Sandwiched Rényi divergence.
pub fn sandwiched_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let q = sandwiched_q(rho, sigma, alpha)?;
    Ok(log_ratio(q, alpha))
}

/// `Q_s = Tr ρ^s σ^{1−s}` with `x⁰` read as the support projector.
pub fn chernoff_q(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64) -> f64 {
    let w = overlap_weights(rho, sigma);
    chernoff_q_weights(rho.eigenvalues(), sigma.eigenvalues(), &w, s)
}

fn chernoff_q_weights(p: &[f64], sv: &[f64], w: &[Vec<f64>], s: f64) -> f64 {
    let mut q = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi <= LOG_FLOOR {
            continue;
        }
        let a = pi.powf(s);
        for (j, &sj) in sv.iter().enumerate() {
            if sj > LOG_FLOOR {
                q += w[i][j] * a * sj.powf(1.0 - s);
            }
        }
    }
    q
}

/// Quantum Chernoff bound: minimizes the convex function `s ↦ Q_s` over `[0, 1]` by golden-section search.
pub fn chernoff_information(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ChernoffResult> {
    check_dims(rho, sigma)?;
    let w = overlap_weights(rho, sigma);
    let (p, sv) = (rho.eigenvalues(), sigma.eigenvalues());
    let f = |s: f64| chernoff_q_weights(p, sv, &w, s);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-10 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for s in [0.0, 1.0] {
        let v = f(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let q = best.1.min(1.0);
    Ok(ChernoffResult {
        s_star: best.0,
        q,
        neg_log_q: -q.ln(),
    })
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let spec = eig_hermitian(&(rho.matrix() - sigma.matrix()))?;
    Ok(0.5 * spec.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

/// `F = ‖ρ^{1/2} σ^{1/2}‖₁`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let a = spectral_function(rho.spectral(), |x| x.max(0.0).sqrt(), None)?;
    let b = spectral_function(sigma.spectral(), |x| x.max(0.0).sqrt(), None)?;
    Ok(singular_values(&(a * b)).iter().sum())
}

/// `C(ρ) = Tr ρ(log ρ)² − (Tr ρ log ρ)²`.
pub fn capacity_of_entanglement(rho: &DensityMatrix) -> f64 {
    let support: Vec<f64> = rho
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&x| x > LOG_FLOOR)
        .collect();
    let mean: f64 = support.iter().map(|&x| x * x.ln()).sum();
    support
        .iter()
        .map(|&x| {
            let d = x.ln() - mean;
            x * d * d
        })
        .sum()
}

/// True iff σ has no matrix elements between ker ρ and its complement and is proportional to ρ on the complement.
pub fn vanishing_variance_predicate(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<bool> {
    check_dims(rho, sigma)?;
    let spec = rho.spectral();
    let d = rho.dim();
    let support: Vec<usize> = (0..d).filter(|&i| spec.eigenvalues[i] > LOG_FLOOR).collect();
    let kernel: Vec<usize> = (0..d).filter(|&i| spec.eigenvalues[i] <= LOG_FLOOR).collect();
    // σ in ρ's eigenbasis.
    let u = &spec.eigenvectors;
    let s = u.adjoint() * sigma.matrix() * u;
    for &k in &kernel {
        for &j in &support {
            if s[(k, j)].norm() > VANISHING_TOL {
                return Ok(false);
            }
        }
    }
    let c: f64 = support.iter().map(|&j| s[(j, j)].re).sum();
    for &i in &support {
        for &j in &support {
            let target = if i == j { c * spec.eigenvalues[i] } else { 0.0 };
            if (s[(i, j)].re - target).abs() > VANISHING_TOL || s[(i, j)].im.abs() > VANISHING_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Finite-difference step for the refined Rényi derivatives.
pub const REFINED_STEP: f64 = 1e-4;

/// Central difference with step `h`, Richardson-extrapolated once.
pub fn richardson_derivative(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `g(α) = ((α−1)/α)·D̃_α = log Q̃_α / α`, smooth through α = 1.
fn scaled_sandwiched(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    let q = sandwiched_q(rho, sigma, alpha)?;
    if !(q > 0.0) || q.is_infinite() {
        return Err(QhtError::SupportViolation { eigenvalue: 0.0 });
    }
    Ok(q.ln() / alpha)
}

/// Refined Rényi divergence `S̃_α = α² ∂_α((α−1)/α · D̃_α)`.
pub fn refined_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0 * REFINED_STEP) {
        return Err(invalid("refined Rényi order must be positive"));
    }
    let d = richardson_derivative(|a| scaled_sandwiched(rho, sigma, a), alpha, REFINED_STEP)?;
    Ok(alpha * alpha * d)
}

/// `V(ρ‖σ) = ∂_α S̃_α` at α = 1, by the same difference scheme.
pub fn variance_from_refined(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    richardson_derivative(|a| refined_renyi(rho, sigma, a), 1.0, REFINED_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_family_at_a_zero() {
        let lam: f64 = 0.37;
        let rho = DensityMatrix::new(crate::numeric::to_complex(&nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[0.5, lam / 2.0, lam / 2.0, 0.5],
        )))
        .unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let s = relative_entropy(&rho, &sigma).unwrap();
        let expect = 0.5 * ((1.0 + lam) * (1.0 + lam).ln() + (1.0 - lam) * (1.0 - lam).ln());
        assert!((s - expect).abs() < 1e-14);
        let v = relative_entropy_variance(&rho, &sigma).unwrap();
        let l = (1.0 + lam).ln() - (1.0 - lam).ln();
        assert!((v - (1.0 - lam * lam) / 4.0 * l * l).abs() < 1e-14);
    }

    #[test]
    fn capacity_diag() {
        let c = capacity_of_entanglement(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap());
        assert!((c - 3.0 / 16.0 * 3f64.ln().powi(2)).abs() < 1e-14);
        assert!(capacity_of_entanglement(&DensityMatrix::maximally_mixed(3)).abs() < 1e-15);
    }

    #[test]
    fn petz_closed_form() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let d = petz_renyi(&rho, &sigma, 2.0).unwrap();
        assert!((d - (0.81f64 / 0.5 + 0.01 / 0.5).ln()).abs() < 1e-14);
        let ds = sandwiched_renyi(&rho, &sigma, 2.0).unwrap();
        assert!((d - ds).abs() < 1e-13);
        assert!(petz_renyi(&rho, &sigma, 1.0).is_err());
    }
}
