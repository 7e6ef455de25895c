use thiserror::Error;

/// Errors produced by the estimation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input law: {0}")]
    InvalidLaw(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge: last change {change:e} above target {target:e}")]
    NonConvergence {
        what: &'static str,
        change: f64,
        target: f64,
    },

    #[error("covariance is degenerate (condition number {condition:e})")]
    DegenerateCovariance { condition: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("time step {dt:e} exceeds stability bound {max:e}")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("integrand {integrand:e} at the upper SNR limit exceeds {threshold:e}; pick a tail estimator or raise snr_max")]
    TailNotResolved { integrand: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
