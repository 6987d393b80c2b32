use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported form type: expected {expected}, got {got}")]
    FormType { expected: &'static str, got: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular gauge transformation at grid point {point}: condition number {cond:.3e}")]
    SingularGauge { point: usize, cond: f64 },

    #[error("flow step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("non-finite field values at t = {t}")]
    NonFinite { t: f64 },

    #[error("metric lost positivity at grid point {point} (t = {t}, min pivot {pivot:.3e})")]
    MetricPositivity { point: usize, t: f64, pivot: f64 },

    #[error("flow times differ: {0} vs {1}")]
    TimeMismatch(f64, f64),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
