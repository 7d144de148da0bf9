//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order s = {0} outside the open interval (0, 1)")]
    InvalidOrder(f64),

    #[error("dimension N = {0} not supported (expected N >= 1)")]
    InvalidDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("degenerate element {index}: {msg}")]
    DegenerateElement { index: usize, msg: String },

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mesh fingerprint mismatch: expected {expected:#018x}, got {got:#018x}")]
    FingerprintMismatch { expected: u64, got: u64 },

    #[error("quadrature did not converge for element pair ({a}, {b}): achieved error {achieved:e} > requested {requested:e}")]
    QuadratureNonConvergence {
        a: usize,
        b: usize,
        achieved: f64,
        requested: f64,
    },

    #[error("right-hand side has non-zero mean beyond tolerance: projected mass {mass:e} (relative {relative:e})")]
    NonZeroMeanData { mass: f64, relative: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("vector not L2-normalized: ||u||_M^2 = {0}")]
    NormalizationViolated(f64),

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("unknown analytic function '{0}'")]
    UnknownFunction(String),

    #[error("unknown check '{0}'")]
    UnknownCheck(String),

    #[error("sweep config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
