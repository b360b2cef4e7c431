use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("cannot parse config {}: {source}", path.display())]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("pricing failed: {0}")]
    Pricing(#[from] amlcp::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}
