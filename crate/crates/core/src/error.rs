//! Error type shared by every module of the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building or operating on algebra
/// elements, metrics, and connections.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must share a lattice dimension do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A derivation or basis index lies outside the valid range.
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// The deformation matrix must satisfy θᵀ = −θ entrywise, exactly as stored.
    #[error("deformation matrix is not skew-symmetric at ({row},{col})")]
    NotSkewSymmetric { row: usize, col: usize },

    /// A module element has the wrong rank for the requested operation.
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    /// The element falls outside the two certified invertibility classes
    /// (nonzero scalar multiple of a monomial; Neumann-dominated λ(1+x) with
    /// ‖x‖₁/|λ| < 1). Refusing is safer than returning an uncertified inverse.
    #[error("element is not invertible by the supported criteria: {reason}")]
    NotInvertible { reason: String },

    /// The Neumann series cannot reach the requested tolerance within the
    /// term budget.
    #[error(
        "tolerance {eps:e} needs {needed} series terms, more than the limit {max_terms}"
    )]
    ToleranceUnreachable {
        eps: f64,
        needed: usize,
        max_terms: usize,
    },

    /// A metric matrix is not symmetric as stored.
    #[error("metric matrix is not symmetric at ({row},{col})")]
    AsymmetricMetric { row: usize, col: usize },

    /// A metric matrix has no usable inverse.
    #[error("metric matrix is singular")]
    SingularMetric,

    /// The requested solver path needs a central (or conformal-over-central)
    /// metric.
    #[error("this solver requires a central or conformal-over-central metric")]
    NonCentralMetric,

    /// The conformal closed form is only valid over the identity base metric.
    #[error("the conformal closed form requires the identity base metric")]
    NonIdentityBase,

    /// The assembled compatibility system is rank-deficient at this
    /// truncation, so no unique solution can be certified.
    #[error(
        "compatibility system is rank-deficient (rank {rank} of {unknowns} unknowns): \
         solution not unique at this truncation"
    )]
    NonUniqueSolution { rank: usize, unknowns: usize },

    /// Input Fourier support does not fit the requested window.
    #[error("Fourier support exceeds the window [-{window},{window}]^n")]
    WindowOverflow { window: i64 },

    /// An internally verified postcondition failed; the result is withheld.
    #[error("{what}: residual {residual:e} exceeds {tol:e}")]
    PostconditionFailed {
        what: &'static str,
        residual: f64,
        tol: f64,
    },
}
