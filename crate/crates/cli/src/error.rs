use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] barista::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: barista::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Row { .. } => "row",
            CliError::Input { .. } => "input",
            CliError::Config(_) => "config",
            CliError::Model(_) | CliError::Stage { .. } => "model",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            line: Option<u64>,
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            schema: &'a str,
            error: Body<'a>,
        }
        let line = match self {
            CliError::Row { line, .. } => Some(*line),
            _ => None,
        };
        let env = Envelope {
            schema: crate::report::SCHEMA,
            error: Body {
                kind: self.kind(),
                message: self.to_string(),
                line,
            },
        };
        serde_json::to_string(&env).expect("error envelope serializes")
    }
}
