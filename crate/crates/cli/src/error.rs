use std::path::PathBuf;

use serde::Serialize;

/// A failure attributed to one dataset (and optionally one architecture)
/// while the rest of the stage carried on.
#[derive(Debug, Clone, Serialize)]
pub struct StageFailure {
    pub dataset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arch: Option<String>,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot parse config {path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing input: {0}")]
    Missing(String),

    #[error(transparent)]
    Core(#[from] loadcast::Error),

    #[error("{} of the requested jobs failed", .0.len())]
    Partial(Vec<StageFailure>),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::ConfigSyntax { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Missing(_) => "missing-input",
            CliError::Core(_) => "pipeline",
            CliError::Partial(_) => "partial-failure",
        }
    }

    /// One-line JSON summary for stderr.
    pub fn to_json(&self, command: &str) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            status: &'static str,
            command: &'a str,
            kind: &'static str,
            message: String,
            #[serde(skip_serializing_if = "<[_]>::is_empty")]
            failures: &'a [StageFailure],
        }
        let failures: &[StageFailure] = match self {
            CliError::Partial(f) => f,
            _ => &[],
        };
        let summary = Summary {
            status: "error",
            command,
            kind: self.kind(),
            message: self.to_string(),
            failures,
        };
        serde_json::to_string(&summary).unwrap_or_else(|_| {
            format!("{{\"status\":\"error\",\"command\":{command:?}}}")
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
