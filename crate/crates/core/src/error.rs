use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge on [{lower}, {upper}]: error estimate {estimate:e} above tolerance {tolerance:e} after {intervals} subintervals")]
    QuadratureNonConvergence {
        lower: f64,
        upper: f64,
        estimate: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("field is not compactly supported: |u| = {value:e} in the boundary margin at cell {cell:?}; enlarge the domain")]
    NonCompactSupport { cell: Vec<usize>, value: f64 },

    #[error("sub-grid smoothing scale: lambda = {lambda} must be at least 2h (h = {spacing})")]
    SubGridScale { lambda: f64, spacing: f64 },

    #[error("shift {shift:?} is not a lattice vector for spacing {spacing}")]
    NonLatticeShift { shift: Vec<f64>, spacing: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value of {quantity} at probe point {point:?}")]
    NonFinite { quantity: String, point: Vec<f64> },

    #[error("model `{model}` lacks {derivative}, required by hypothesis set {hypothesis}")]
    MissingDerivative {
        model: String,
        derivative: &'static str,
        hypothesis: &'static str,
    },

    #[error("solution support reached the padded boundary at t = {time}; increase the margin")]
    SupportReachedBoundary { time: f64 },

    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),

    #[error("CK preconditions not met: {0}")]
    CkPreconditions(String),

    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
