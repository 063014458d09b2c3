use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("instance too large for exhaustive search: {n} vertices (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("Z2 symmetry violated: max deviation {0:e}")]
    Symmetry(f64),
    #[error("degenerate fit: {0}")]
    Rank(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
