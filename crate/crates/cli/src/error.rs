//! Command errors and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// exit 1
    #[error("verification failed: {0}")]
    Verification(String),
    /// exit 2
    #[error("config error: {0}")]
    Config(String),
    /// exit 2
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// exit 3
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<higgslab_core::Error> for CliError {
    fn from(e: higgslab_core::Error) -> Self {
        use higgslab_core::Error as E;
        match e {
            E::StepFailure { .. } | E::NonFinite { .. } | E::MetricPositivity { .. } | E::SingularGauge { .. } => CliError::Numerical(e.to_string()),
            E::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}
