//! Closed-form thermal quantities of a two-dimensional CFT on an interval.
//!
//! Lengths and inverse temperatures share one unit; entropies are in nats.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Two thermal states at inverse temperatures β₁ (ρ) and β₂ (σ) restricted to an interval of length ℓ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CftThermalPair {
    pub c: f64,
    pub ell: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl CftThermalPair {
    pub fn new(c: f64, ell: f64, beta1: f64, beta2: f64) -> Result<Self> {
        for (name, x) in [("c", c), ("ell", ell), ("beta1", beta1), ("beta2", beta2)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {x}")));
            }
        }
        Ok(Self { c, ell, beta1, beta2 })
    }
}

/// `x coth x`, with the series near zero.
fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0 - x.powi(4) / 45.0
    } else {
        x / x.tanh()
    }
}

/// `log(sinh x / x)`, stable for small and large x.
fn log_sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x * x / 6.0 - x.powi(4) / 180.0
    } else if x > 20.0 {
        x - std::f64::consts::LN_2 - x.ln() + (-2.0 * x).exp().ln_1p()
    } else {
        (x.sinh() / x).ln()
    }
}

/// `S = (c/6)(1 − β₁²/β₂²)(1 − x₁ coth x₁) + (c/3) log(β₁ sinh x₁ / (β₂ sinh x₂))` with `xᵢ = πℓ/βᵢ`.
pub fn cft_relative_entropy(pair: &CftThermalPair) -> f64 {
    let pi = std::f64::consts::PI;
    let x1 = pi * pair.ell / pair.beta1;
    let x2 = pi * pair.ell / pair.beta2;
    let r = pair.beta1 / pair.beta2;
    // β₁ sinh x₁ / (β₂ sinh x₂) = (sinh x₁/x₁)/(sinh x₂/x₂) since β x = πℓ.
    (pair.c / 6.0) * (1.0 - r * r) * (1.0 - x_coth_x(x1)) + (pair.c / 3.0) * (log_sinhc(x1) - log_sinhc(x2))
}

/// Leading small-interval terms of S and V and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmallInterval {
    pub s_leading: f64,
    pub v_leading: f64,
    pub ratio: f64,
    /// `ratio ≥ 2`.
    pub lower_bound_satisfied: bool,
}

/// Temperature factor multiplying the leading small-interval terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesForm {
    /// `(1 − β₁/β₂)²`, as printed.
    #[default]
    Printed,
    /// `(1 − β₁²/β₂²)²`, the x⁴ coefficient of [`cft_relative_entropy`].
    Derived,
}

/// `S ≈ (cπ⁴/540)(1 − β₁/β₂)²(ℓ/β₁)⁴` and `V ≈ (cπ⁴/162)(1 − β₁/β₂)²(ℓ/β₁)⁴`.
pub fn cft_small_interval(pair: &CftThermalPair) -> SmallInterval {
    cft_small_interval_with(pair, SeriesForm::Printed)
}

/// Leading terms with a chosen temperature factor.
pub fn cft_small_interval_with(pair: &CftThermalPair, form: SeriesForm) -> SmallInterval {
    let pi4 = std::f64::consts::PI.powi(4);
    let r = pair.beta1 / pair.beta2;
    let factor = match form {
        SeriesForm::Printed => (1.0 - r).powi(2),
        SeriesForm::Derived => (1.0 - r * r).powi(2),
    };
    let common = factor * (pair.ell / pair.beta1).powi(4);
    let ratio = 10.0 / 3.0;
    SmallInterval {
        s_leading: pair.c * pi4 / 540.0 * common,
        v_leading: pair.c * pi4 / 162.0 * common,
        ratio,
        lower_bound_satisfied: ratio >= 2.0,
    }
}

/// `S(β) = (c/3) log((β/(πε)) sinh(πℓ/β)) + g_a + g_b`.
pub fn cft_entanglement_entropy(c: f64, ell: f64, beta: f64, eps_uv: f64, g_a: f64, g_b: f64) -> Result<f64> {
    for (name, x) in [("c", c), ("ell", ell), ("beta", beta), ("eps_uv", eps_uv)] {
        if !(x > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {x}")));
        }
    }
    let x = std::f64::consts::PI * ell / beta;
    // (β/πε) sinh x = (ℓ/ε)(sinh x / x).
    Ok((c / 3.0) * ((ell / eps_uv).ln() + log_sinhc(x)) + g_a + g_b)
}
