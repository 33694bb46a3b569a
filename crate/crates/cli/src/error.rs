use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Errors surfaced by commands, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Core(#[from] litlvm::Error),

    /// Every run of a batch failed; carries the first failure's exit code.
    #[error("all {count} runs failed; first failure: {message}")]
    AllFailed { code: i32, count: usize, message: String },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for data problems, 4 for numeric
    /// divergence.
    pub fn exit_code(&self) -> i32 {
        use litlvm::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::AllFailed { code, .. } => *code,
            CliError::Core(e) => match e {
                E::Argument(_) => 2,
                E::Divergence { .. } | E::Numeric(_) | E::SearchFailed(_) => 4,
                E::Dimension(_) | E::Degenerate(_) | E::State(_) | E::Weight { .. } => 3,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            4 => "divergence",
            _ => "data",
        }
    }
}
