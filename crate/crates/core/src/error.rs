use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting the tolerance.
    #[error("quadrature did not converge: best estimate {value} with error estimate {err_est}")]
    Convergence { value: f64, err_est: f64 },

    /// The spectrum is too close to degenerate for reliable eigenvectors.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("no accepted samples fell inside the window")]
    EmptyWindow,

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("insufficient tail data: {0}")]
    InsufficientTail(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
