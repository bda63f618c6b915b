use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("tabulated autocovariance is not admissible: {0}")]
    NonSummable(String),

    #[error("lag cutoff {lag_cutoff} leaves tail mass {tail:e}, above 1e-10 * r(0)")]
    InsufficientLagCutoff { lag_cutoff: usize, tail: f64 },

    #[error("grid size {grid_size} is below twice the lag cutoff {lag_cutoff} (aliasing)")]
    Aliasing { grid_size: usize, lag_cutoff: usize },

    #[error("spectral grids differ: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("spectrum vanishes at bin {bin} (f = {frequency}); log-integral diverges")]
    DivergentSpectrum { bin: usize, frequency: f64 },

    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("covariance is indefinite (eigenvalue {0:e})")]
    IndefiniteCovariance(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),

    #[error("not enough samples: {got} < {needed}")]
    TooFewSamples { got: usize, needed: usize },

    #[error("too many duplicate samples: {duplicates} of {count}")]
    TooManyDuplicates { duplicates: usize, count: usize },

    #[error("mass defect {defect:e} over the integration box exceeds {limit:e}")]
    MassDefect { defect: f64, limit: f64 },

    #[error("non-finite log-ratio at sample {index}")]
    NonFiniteLogRatio { index: usize },

    #[error("gradient evaluation failed at probe {0:?}")]
    GradientFailure(Vec<f64>),

    #[error("density vanishes at the mode")]
    ZeroAtMode,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed sample file: {0}")]
    Format(String),

    /// Schema violations, each prefixed by its field path.
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
