use thiserror::Error;

/// Errors produced by carpetlab.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature did not reach its tolerance.
    #[error(
        "quadrature did not converge: total error estimate {total_error:.3e}, \
         worst panel [{:.6}, {:.6}] with estimate {worst_error:.3e}",
        worst_interval.0,
        worst_interval.1
    )]
    Quadrature {
        total_error: f64,
        worst_interval: (f64, f64),
        worst_error: f64,
    },

    /// The initial state has no closed-form sum/difference factorization.
    #[error("initial state does not factorize: {0}")]
    NotFactorizable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
