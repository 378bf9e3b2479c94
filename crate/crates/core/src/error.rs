use thiserror::Error;

/// Errors raised by the numerical kernels and everything built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix has no entries ({rows}x{cols})")]
    Empty { rows: usize, cols: usize },
    #[error("iterative decomposition did not converge")]
    ConvergenceFailure,
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("group {group} requires real input")]
    FieldMismatch { group: &'static str },
    #[error("invalid rank r={r} for size l={ell}")]
    InvalidRank { ell: usize, r: usize },
    #[error("dimension hypothesis violated: need l >= 2n > 0, got n={n}, l={ell}")]
    DimensionHypothesis { n: usize, ell: usize },
    #[error("matrix does not lie in the reducer's ambient space: {0}")]
    AmbientMismatch(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("database is empty")]
    EmptyDatabase,
    #[error("feature map mismatch: {0}")]
    FeatureMapMismatch(String),
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("unknown record id {0:?}")]
    UnknownId(String),
    #[error("invalid experiment configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
