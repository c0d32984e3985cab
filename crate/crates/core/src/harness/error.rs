use serde_json::{json, Value};
use thiserror::Error;

use crate::Error;

/// Harness failures, each with a machine-readable category and exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("parse error at line {line}, column {column} (field `{path}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },

    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("`{field}`: classes are defined over different domains")]
    DomainMismatch { field: String },

    #[error("{0}")]
    CapExceeded(String),

    #[error("{0}")]
    BudgetExceeded(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, err: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Maps a library error raised while handling `field`.
    pub fn from_core(field: &str, err: Error) -> Self {
        match err {
            Error::CapExceeded { .. } => HarnessError::CapExceeded(err.to_string()),
            Error::BudgetExceeded { .. } => HarnessError::BudgetExceeded(err.to_string()),
            Error::DomainMismatch => HarnessError::DomainMismatch {
                field: field.to_string(),
            },
            other => HarnessError::validation(field, other.to_string()),
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            HarnessError::Parse { .. } => "parse",
            HarnessError::Validation { .. } => "validation",
            HarnessError::DomainMismatch { .. } => "domain_mismatch",
            HarnessError::CapExceeded(_) => "cap_exceeded",
            HarnessError::BudgetExceeded(_) => "budget_exceeded",
            HarnessError::Invariant(_) => "invariant",
            HarnessError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } => 1,
            HarnessError::Parse { .. } => 2,
            HarnessError::Validation { .. } | HarnessError::DomainMismatch { .. } => 3,
            HarnessError::CapExceeded(_) | HarnessError::BudgetExceeded(_) => 4,
            HarnessError::Invariant(_) => 5,
        }
    }

    /// `{"error": category, "exit_code": n, "message": ..., ...}`.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.category(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            HarnessError::Parse {
                line, column, path, ..
            } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
                v["field"] = json!(path);
            }
            HarnessError::Validation { field, .. } | HarnessError::DomainMismatch { field } => {
                v["field"] = json!(field);
            }
            HarnessError::Io { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v
    }
}
