use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

/// Everything that can go wrong outside the numerical core.
#[derive(Debug, thiserror::Error)]
pub enum ScvxError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] scvx_core::Error),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{0}")]
    Server(String),
}

pub type Result<T, E = ScvxError> = std::result::Result<T, E>;

impl ScvxError {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        ScvxError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn schema(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        ScvxError::Schema {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    pub fn parse(path: impl AsRef<Path>, row: usize, column: impl Into<String>, message: impl Into<String>) -> Self {
        ScvxError::Parse {
            path: path.as_ref().to_path_buf(),
            row,
            column: column.into(),
            message: message.into(),
        }
    }

    /// 1 verification failure, 2 input error, 3 convergence failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScvxError::Verification(_) => 1,
            ScvxError::Core(scvx_core::Error::NoConvergence { .. } | scvx_core::Error::PointFailed { .. }) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScvxError::Io { .. } => "io",
            ScvxError::Parse { .. } => "parse",
            ScvxError::Schema { .. } => "schema",
            ScvxError::Usage(_) => "usage",
            ScvxError::Core(scvx_core::Error::NoConvergence { .. } | scvx_core::Error::PointFailed { .. }) => {
                "convergence"
            }
            ScvxError::Core(_) => "invalid_input",
            ScvxError::Verification(_) => "verification",
            ScvxError::Server(_) => "server",
        }
    }

    /// Machine-readable form written to stderr by the CLI.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        let obj = v.as_object_mut().expect("object literal");
        match self {
            ScvxError::Io { path, .. } | ScvxError::Schema { path, .. } => {
                obj.insert("path".into(), json!(path.display().to_string()));
            }
            ScvxError::Parse { path, row, column, .. } => {
                obj.insert("path".into(), json!(path.display().to_string()));
                obj.insert("row".into(), json!(row));
                obj.insert("column".into(), json!(column));
            }
            ScvxError::Core(scvx_core::Error::PointFailed {
                index,
                weight,
                sweeps,
                last_delta,
            }) => {
                obj.insert("index".into(), json!(index));
                obj.insert("weight".into(), json!(weight));
                obj.insert("sweeps".into(), json!(sweeps));
                obj.insert("last_delta".into(), json!(last_delta));
            }
            _ => {}
        }
        v
    }
}
