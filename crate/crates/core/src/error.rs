use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}` = {value}: must be finite and strictly positive")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("moment of order {order} is undefined (requires order < theta = {theta})")]
    MomentUndefined { order: f64, theta: f64 },

    #[error("series `{what}` did not converge after {terms} terms")]
    Divergence { what: &'static str, terms: usize },

    #[error("{what} failed to converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("survival function underflows at x = {x}; hazard is not representable")]
    TailDegenerate { x: f64 },

    #[error(
        "quadrature exceeded {panels} panels (value {value}, error estimate {error_estimate})"
    )]
    MaxPanelsExceeded {
        panels: usize,
        value: f64,
        error_estimate: f64,
    },

    #[error(
        "likelihood-ratio statistic is negative ({stat}); the full-model fit is not a maximum"
    )]
    NegativeLr { stat: f64 },

    #[error("invalid dataset: {0}")]
    Dataset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
