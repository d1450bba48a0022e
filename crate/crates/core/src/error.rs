//! Error type shared by all modules.

use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QhtError {
    /// Input matrix is not Hermitian beyond tolerance.
    #[error("matrix is not Hermitian: max |M - M^dagger| = {max_asym:.3e}")]
    NotHermitian { max_asym: f64 },

    /// An eigenvalue lies below the floor where the requested function is singular.
    #[error("support violation: eigenvalue {eigenvalue:.3e} below floor")]
    SupportViolation { eigenvalue: f64 },

    /// Shapes of the operands disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A scalar or structural argument is outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested computation would exceed a configured size limit.
    #[error("budget exceeded: {what} exceeds limit {limit}")]
    BudgetExceeded { what: String, limit: u64 },

    /// Adaptive quadrature hit its subdivision limit.
    #[error("quadrature did not converge, residual estimate {residual:.3e}")]
    QuadratureNonConvergence { residual: f64 },

    /// Two quasi-particle vacua are orthogonal, so the overlap expansion breaks down.
    #[error("orthogonal vacua: det T11 = {det:.3e}")]
    OrthogonalVacua { det: f64 },

    /// A matrix expected to be unitary is not.
    #[error("matrix is not unitary: deviation {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    /// A density matrix failed validation.
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, QhtError>;

pub(crate) fn invalid(msg: impl Into<String>) -> QhtError {
    QhtError::InvalidArgument(msg.into())
}
