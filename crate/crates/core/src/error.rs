use thiserror::Error;

pub use crate::alerts::AlertError;
pub use crate::config::ConfigError;
pub use crate::harness::ScenarioError;
pub use crate::ingest::IngestError;
pub use crate::tracking::TrackingError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("timestamp must be finite and non-negative (got {0})")]
    BadTimestamp(f64),
    #[error("position is not finite")]
    NonFinitePosition,
    #[error("quality must be in [0, 1] (got {0})")]
    QualityOutOfRange(f64),
    #[error("a pair needs two distinct players (got `{0}` twice)")]
    SelfPair(String),
}

/// Top-level error for whole runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Alert(#[from] AlertError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("connection lost after {attempts} attempts: {reason}")]
    ConnectionLost { attempts: u32, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for configuration problems, 3 for I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Scenario(_) => 2,
            Error::Alert(AlertError::BadSinkUri(_)) => 2,
            Error::Ingest(IngestError::BadFeedUri(_)) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
