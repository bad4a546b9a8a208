use thiserror::Error;

/// Errors surfaced by the library. Non-convergence of a cone optimizer is not
/// an error; it is reported through `ConeReport::converged`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("flow blew up at t = {t:.6e} (step size {dt:.3e})")]
    Blowup {
        t: f64,
        dt: f64,
        /// Trace accumulated up to the failure.
        partial: Box<crate::flow::FlowTrace>,
    },

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
