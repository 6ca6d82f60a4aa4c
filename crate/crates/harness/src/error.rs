use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error(transparent)]
    Model(#[from] cpsid_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for a degenerate model, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use cpsid_core::Error as Core;
        match self {
            HarnessError::Config { .. } | HarnessError::ConfigParse { .. } => 2,
            HarnessError::Model(Core::InvalidConfig { .. } | Core::NotDefaultBank | Core::Aliasing { .. }) => 2,
            HarnessError::Model(Core::DegenerateCondition(_) | Core::DegenerateProfile | Core::FitDegenerate) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
