use std::path::Path;

use blowup_core::Error as CoreError;
use serde_json::json;

/// Everything that can end a run unsuccessfully.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Usage { message: String },

    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Solver(#[from] CoreError),

    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { key: key.into(), message: message.into() }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Io { path: path.display().to_string(), message: err.to_string() }
    }

    /// Process exit status; see the README for the table.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage { .. } => 2,
            Self::Config { .. } => 3,
            Self::Io { .. } => 4,
            Self::Solver(e) => match e {
                CoreError::QuadratureFailure(_)
                | CoreError::BudgetExceeded(_)
                | CoreError::NoStabilization(_)
                | CoreError::NewtonDivergence(_) => 6,
                _ => 5,
            },
            Self::CheckFailed(_) => 7,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Usage { .. } => "UsageError",
            Self::Config { .. } => "ConfigError",
            Self::Io { .. } => "IoError",
            Self::Solver(e) => e.kind(),
            Self::CheckFailed(_) => "CheckFailed",
        }
    }

    /// Machine-readable error object written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let message = match self {
            Self::Config { message, .. } | Self::Io { message, .. } => message.clone(),
            _ => self.to_string(),
        };
        let mut body = json!({
            "kind": self.kind(),
            "message": message,
            "exit_code": self.exit_code(),
        });
        match self {
            Self::Config { key, .. } => body["key"] = json!(key),
            Self::Io { path, .. } => body["path"] = json!(path),
            _ => {}
        }
        json!({ "error": body })
    }
}

pub type CliResult<T> = Result<T, CliError>;
