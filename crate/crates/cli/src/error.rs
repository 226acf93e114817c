use std::fmt;

use serde_json::json;
use thiserror::Error;

/// A configuration problem, located by field path or by source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: Some(path.into()),
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            path: None,
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        if let Some(p) = &self.path {
            write!(f, "{p}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("numerical failure: {0}")]
    Numerical(#[from] smsrate::Error),

    #[error("cannot {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration errors, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let body = match self {
            CliError::Config(e) => json!({
                "kind": "config",
                "path": e.path,
                "line": e.line,
                "column": e.column,
                "message": e.message,
            }),
            CliError::Numerical(e) => json!({
                "kind": "numerical",
                "type": e.kind(),
                "message": e.to_string(),
            }),
            CliError::Io { path, source, .. } => json!({
                "kind": "io",
                "path": path,
                "message": source.to_string(),
            }),
        };
        json!({ "error": body, "exit_code": self.exit_code() })
    }
}
