use thiserror::Error;

/// Failures surfaced by the harness and CLI.
#[derive(Debug, Error)]
pub enum BenchError {
    /// Invalid configuration or arguments (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qrr_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    /// Process exit code: 2 for configuration errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
