use std::path::PathBuf;

use stockcast_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Row { path: PathBuf, line: u64, message: String },
    #[error(transparent)]
    Model(#[from] CoreError),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("report encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    /// Process exit status: 1 config, 2 data, 3 training divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 1,
            BenchError::Model(CoreError::Divergence { .. }) => 3,
            _ => 2,
        }
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, BenchError::Model(CoreError::Divergence { .. }))
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
