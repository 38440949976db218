use serde::Serialize;
use thiserror::Error;

/// The point at which a numerical failure occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedProbe {
    pub kernel: String,
    pub domain: String,
    pub point: Vec<f64>,
    pub error: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("numerical failure at {:?} ({}): {}", .0.point, .0.kernel, .0.error)]
    Probe(Box<FailedProbe>),

    #[error("oracle check failed: {0}")]
    OracleFailed(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: &str, reason: impl std::fmt::Display) -> Self {
        CliError::Config(format!("invalid configuration field `{field}`: {reason}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Probe(_) | CliError::OracleFailed(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<czpatch::Error> for CliError {
    fn from(e: czpatch::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
