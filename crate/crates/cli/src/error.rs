use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{check}: {source}")]
    Module {
        check: String,
        #[source]
        source: carnot_tangent::Error,
    },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn module(check: &str, source: carnot_tangent::Error) -> Self {
        CliError::Module {
            check: check.to_string(),
            source,
        }
    }

    /// 1 for failed checks and module errors, 2 for usage, parse and I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Module { .. } | CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
        }
    }
}
