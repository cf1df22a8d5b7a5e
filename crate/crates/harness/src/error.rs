use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation: {0}")]
    Core(#[from] dtc_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("manifest check failed: {0}")]
    Manifest(String),

    #[error("analysis: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
