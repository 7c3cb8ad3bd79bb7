use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] scramblab::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 budget, 4 empty result, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        use scramblab::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 5,
            CliError::Core(e) if e.is_budget() => 3,
            CliError::Core(E::NoValidScheme(_) | E::GapTooSmall { .. }) => 4,
            CliError::Core(E::Io(_)) => 5,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
