use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    Invalid,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config {kind:?}: {message}")]
    Config {
        kind: ConfigErrorKind,
        /// Dotted path of the offending field, when known.
        field: Option<String>,
        message: String,
    },
    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("numerical failure{}: {message}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Numerical { step: Option<usize>, message: String },
}

impl HarnessError {
    pub fn syntax(message: impl Into<String>) -> Self {
        HarnessError::Config {
            kind: ConfigErrorKind::Syntax,
            field: None,
            message: message.into(),
        }
    }

    pub fn unknown_key(field: Option<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            kind: ConfigErrorKind::UnknownKey,
            field,
            message: message.into(),
        }
    }

    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        let field = field.into();
        let message = message.into();
        HarnessError::Config {
            kind: ConfigErrorKind::Invalid,
            message: format!("{field}: {message}"),
            field: Some(field),
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Numerical { .. } => 3,
            HarnessError::Io { .. } => 1,
        }
    }

    /// Machine-readable report written to `error.json` and stderr.
    pub fn report(&self) -> ErrorReport {
        let (kind, config_kind, field, step) = match self {
            HarnessError::Config { kind, field, .. } => ("config", Some(*kind), field.clone(), None),
            HarnessError::Io { .. } => ("io", None, None, None),
            HarnessError::Numerical { step, .. } => ("numerical", None, None, *step),
        };
        ErrorReport {
            status: "error",
            kind,
            config_kind,
            field,
            step,
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

impl From<madelung_core::Error> for HarnessError {
    fn from(err: madelung_core::Error) -> Self {
        match err {
            madelung_core::Error::StepFailed { step, source } => HarnessError::Numerical {
                step: Some(step),
                message: source.to_string(),
            },
            other => HarnessError::Numerical {
                step: None,
                message: other.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_kind: Option<ConfigErrorKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub exit_code: i32,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, HarnessError>;
