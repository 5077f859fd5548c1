use thiserror::Error;

/// Errors raised by model construction, eigensolvers and observable evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Fock cutoff too small: n_max = {0} (need at least {min})", min = crate::model::MIN_FOCK_CUTOFF)]
    CutoffTooSmall(usize),

    #[error("operator {0} is not defined for a model with {1} qubits")]
    InvalidOperator(&'static str, usize),

    #[error("parity is not conserved: {0}")]
    SymmetryBroken(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds the dense solver cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("need at least {needed} eigenvalues, have {have}")]
    TooFewEigenvalues { needed: usize, have: usize },

    #[error("trace of density matrix deviates from 1 by {0:e}")]
    InvalidTrace(f64),

    #[error("missing eigenvectors")]
    MissingEigenvectors,

    #[error("{0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
