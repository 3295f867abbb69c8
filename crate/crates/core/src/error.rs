use thiserror::Error;

use crate::optim::IterRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Power-law generator evaluated at the origin.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("no convergence after {iterations} iterations (gradient inf-norm {grad_inf:.3e})")]
    Convergence {
        iterations: usize,
        grad_inf: f64,
        history: Vec<IterRecord>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
