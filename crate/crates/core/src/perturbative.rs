//! Second-order expansions of relative entropy and its variance around σ.
//!
//! All formulas are evaluated in the eigenbasis of σ, where the logarithmic
//! derivative and the symmetric logarithmic derivative are entrywise rescalings
//! of the perturbation.

use serde::Serialize;

use crate::divergences::{relative_entropy, relative_entropy_variance};
use crate::error::{invalid, QhtError, Result};
use crate::numeric::{check_hermitian, frobenius, CMat, LOG_FLOOR};
use crate::states::{thermal_state, DensityMatrix};

/// Relative gap below which two eigenvalues of σ are treated as equal.
pub const DEGENERACY_CUTOFF: f64 = 1e-10;

/// Base state σ and a traceless first-order direction ρ⁽¹⁾.
#[derive(Clone, Debug)]
pub struct PerturbativeFamily {
    pub sigma: DensityMatrix,
    pub rho1: CMat,
    pub lambda: f64,
}

impl PerturbativeFamily {
    /// Checks tracelessness and positivity of `σ + λρ⁽¹⁾`.
    pub fn new(sigma: DensityMatrix, rho1: CMat, lambda: f64) -> Result<Self> {
        check_hermitian(&rho1)?;
        if rho1.nrows() != sigma.dim() {
            return Err(QhtError::DimensionMismatch {
                expected: sigma.dim(),
                found: rho1.nrows(),
            });
        }
        let tr = rho1.trace().norm();
        if tr > 1e-12 {
            return Err(invalid(format!("perturbation must be traceless, trace = {tr:.3e}")));
        }
        let family = Self { sigma, rho1, lambda };
        family.state()?;
        Ok(family)
    }

    /// `ρ(λ) = σ + λρ⁽¹⁾` at the stored λ.
    pub fn state(&self) -> Result<DensityMatrix> {
        self.state_at(self.lambda)
    }

    pub fn state_at(&self, lambda: f64) -> Result<DensityMatrix> {
        DensityMatrix::new(self.sigma.matrix() + self.rho1.scale(lambda))
    }

    fn eigen_data(&self) -> Result<(Vec<f64>, CMat)> {
        let spec = self.sigma.spectral();
        if let Some(&bad) = spec.eigenvalues.iter().find(|&&x| x <= LOG_FLOOR) {
            return Err(QhtError::SupportViolation { eigenvalue: bad });
        }
        let u = &spec.eigenvectors;
        Ok((spec.eigenvalues.clone(), u.adjoint() * &self.rho1 * u))
    }
}

/// Summary of the perturbative quantities of a family.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerturbativeReport {
    pub s2: f64,
    pub v2: f64,
    pub fisher: f64,
    pub ratio: f64,
    pub commutator_norm: f64,
}

/// `(log a − log b)/(a − b)`, with the limit `1/a` on near-degenerate pairs.
fn log_divided_difference(a: f64, b: f64) -> f64 {
    if (a - b).abs() < DEGENERACY_CUTOFF * a.max(b) {
        return 1.0 / a;
    }
    let t = (a - b) / b;
    t.ln_1p() / (a - b)
}

fn kernel_matrix(lam: &[f64]) -> Vec<Vec<f64>> {
    lam.iter()
        .map(|&a| lam.iter().map(|&b| log_divided_difference(a, b)).collect())
        .collect()
}

/// Logarithmic derivative ℒ = d/dλ log(σ + λρ⁽¹⁾) at λ = 0.
pub fn log_derivative(family: &PerturbativeFamily) -> Result<CMat> {
    let (lam, r) = family.eigen_data()?;
    let k = kernel_matrix(&lam);
    let l = CMat::from_fn(lam.len(), lam.len(), |i, j| r[(i, j)] * k[i][j]);
    let u = &family.sigma.spectral().eigenvectors;
    Ok(u * l * u.adjoint())
}

/// `S⁽²⁾ = Tr(ρ⁽¹⁾ℒ)`.
pub fn s2(family: &PerturbativeFamily) -> Result<f64> {
    let (lam, r) = family.eigen_data()?;
    let k = kernel_matrix(&lam);
    let mut acc = 0.0;
    for i in 0..lam.len() {
        for j in 0..lam.len() {
            acc += r[(i, j)].norm_sqr() * k[i][j];
        }
    }
    Ok(acc)
}

/// `V⁽²⁾ = 2 Tr(σℒ²)`.
pub fn v2(family: &PerturbativeFamily) -> Result<f64> {
    let (lam, r) = family.eigen_data()?;
    let k = kernel_matrix(&lam);
    let mut acc = 0.0;
    for i in 0..lam.len() {
        for j in 0..lam.len() {
            acc += r[(i, j)].norm_sqr() * k[i][j] * k[i][j] * (lam[i] + lam[j]);
        }
    }
    Ok(acc)
}

/// Symmetric logarithmic derivative `L` and quantum Fisher information `F = Tr(ρ⁽¹⁾L)`.
pub fn sld_fisher(family: &PerturbativeFamily) -> Result<(CMat, f64)> {
    let (lam, r) = family.eigen_data()?;
    let d = lam.len();
    let l = CMat::from_fn(d, d, |i, j| r[(i, j)].scale(2.0 / (lam[i] + lam[j])));
    let mut f = 0.0;
    for i in 0..d {
        for j in 0..d {
            f += r[(i, j)].norm_sqr() * 2.0 / (lam[i] + lam[j]);
        }
    }
    let u = &family.sigma.spectral().eigenvectors;
    Ok((u * l * u.adjoint(), f))
}

/// Frobenius norm of `[σ, ρ⁽¹⁾]`.
pub fn commutator_norm(family: &PerturbativeFamily) -> f64 {
    let s = family.sigma.matrix();
    frobenius(&(s * &family.rho1 - &family.rho1 * s))
}

/// All perturbative quantities for one family.
pub fn report(family: &PerturbativeFamily) -> Result<PerturbativeReport> {
    let s = s2(family)?;
    let v = v2(family)?;
    let (_, fisher) = sld_fisher(family)?;
    Ok(PerturbativeReport {
        s2: s,
        v2: v,
        fisher,
        ratio: if s > 0.0 { v / s } else { f64::NAN },
        commutator_norm: commutator_norm(family),
    })
}

/// Two thermal states of one Hamiltonian compared at finite and infinitesimal separation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThermalReport {
    /// `S(ρ₂‖ρ₁)`.
    pub relative_entropy: f64,
    /// `V(ρ₂‖ρ₁)` evaluated directly.
    pub variance: f64,
    /// `C(β₂) = β₂²(⟨H²⟩ − ⟨H⟩²)` in ρ₂.
    pub heat_capacity: f64,
    /// `(1 − β₁/β₂)² C(β₂)`.
    pub variance_closed_form: f64,
    /// Perturbative report for σ = ρ_{β₁} and ρ⁽¹⁾ = ∂_β ρ_β at β₁.
    pub perturbative: PerturbativeReport,
}

/// `β²(⟨H²⟩_β − ⟨H⟩_β²)`.
pub fn heat_capacity(h: &CMat, beta: f64) -> Result<f64> {
    let rho = thermal_state(h, beta)?;
    let u = &rho.spectral().eigenvectors;
    let hb = u.adjoint() * h * u;
    let p = rho.eigenvalues();
    let mean: f64 = (0..p.len()).map(|i| p[i] * hb[(i, i)].re).sum();
    // Centered second moment avoids cancellation in ⟨H²⟩ − ⟨H⟩².
    let hc = &hb - CMat::identity(p.len(), p.len()).scale(mean);
    let h2 = &hc * &hc;
    let var: f64 = (0..p.len()).map(|i| p[i] * h2[(i, i)].re).sum();
    Ok(beta * beta * var)
}

/// Compares `V(ρ₂‖ρ₁)` with `(1 − β₁/β₂)² C(β₂)` and reports the perturbative ratio.
pub fn thermal_perturbation_report(h: &CMat, beta1: f64, beta2: f64) -> Result<ThermalReport> {
    if !(beta1 > 0.0 && beta2 > 0.0) {
        return Err(invalid("inverse temperatures must be positive"));
    }
    let rho1 = thermal_state(h, beta1)?;
    let rho2 = thermal_state(h, beta2)?;
    let s = relative_entropy(&rho2, &rho1)?;
    let v = relative_entropy_variance(&rho2, &rho1)?;
    let c = heat_capacity(h, beta2)?;
    let closed = (1.0 - beta1 / beta2).powi(2) * c;
    // ∂_β ρ_β = −ρ_β (H − ⟨H⟩_β).
    let d = h.nrows();
    let mean = crate::states::expectation(h, &rho1);
    let hc = h - CMat::identity(d, d).scale(mean);
    let dir = -(rho1.matrix() * &hc + &hc * rho1.matrix()).scale(0.5);
    let family = PerturbativeFamily {
        sigma: rho1,
        rho1: dir,
        lambda: 0.0,
    };
    Ok(ThermalReport {
        relative_entropy: s,
        variance: v,
        heat_capacity: c,
        variance_closed_form: closed,
        perturbative: report(&family)?,
    })
}

/// Leading estimate `α* = (λ/2)√(V⁽²⁾/(πE₂²))·exp(−E₂²/(λ²V⁽²⁾))` for a threshold `E₂ < 0`.
pub fn second_order_alpha_estimate(e2: f64, lambda: f64, v2: f64) -> Result<f64> {
    if !(e2 < 0.0) {
        return Err(invalid("the estimate is restricted to E2 < 0"));
    }
    if !(lambda > 0.0 && v2 > 0.0) {
        return Err(invalid("lambda and V2 must be positive"));
    }
    let pref = 0.5 * lambda * (v2 / (std::f64::consts::PI * e2 * e2)).sqrt();
    Ok(pref * (-e2 * e2 / (lambda * lambda * v2)).exp())
}

/// `B(x) = (x + 1) log x / (x − 1)`, with `B(1) = 2`.
pub fn b_function(x: f64) -> f64 {
    let t = x - 1.0;
    if t.abs() < 1e-8 {
        return 2.0 + t * t / 6.0;
    }
    (x + 1.0) * t.ln_1p() / t
}
