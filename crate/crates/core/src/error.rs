use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("non-finite value in {0}")]
    Numeric(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("optimization diverged at epoch {epoch} (loss = {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("censoring weight undefined at grid time {time} (index {index})")]
    Weight { index: usize, time: f64 },

    #[error("grid search failed: every cell errored ({} cells)", .0.len())]
    SearchFailed(Vec<String>),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
