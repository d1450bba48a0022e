//! Quantum hypothesis testing on finite-dimensional systems.
//!
//! The crate covers single-copy divergences, perturbative expansions,
//! one-shot and n-copy tests, qubit combinatorics, Gaussian fermion
//! chains and closed-form thermal CFT formulas. Entropic quantities are
//! in nats throughout.

pub mod cft;
pub mod divergences;
pub mod error;
pub mod fermion;
pub mod multicopy;
pub mod numeric;
pub mod oneshot;
pub mod perturbative;
pub mod qubit_lab;
pub mod random;
pub mod states;

pub use error::{QhtError, Result};
pub use numeric::{CMat, CVec, SpectralDecomposition, C64};
pub use states::{DensityMatrix, MeasurementOperator};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
