//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: invalid input ([`Error::is_usage`]) and
/// numerical failures such as an unreachable tail bound or a quadrature that
/// did not converge.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the documented domain of an operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A hypergeometric series with a non-positive integer lower parameter
    /// that is not rescued by an earlier termination.
    #[error("hypergeometric lower parameter {gamma} is a pole (no earlier termination)")]
    HypergeometricPole { gamma: f64 },

    /// A truncated spectral series did not reach its tolerance within `k_max`.
    #[error("series tail bound {achieved:.3e} above tolerance {tol:.3e} after {terms} terms (best value {value})")]
    TailBound {
        value: f64,
        achieved: f64,
        tol: f64,
        terms: usize,
    },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature estimated error {achieved:.3e} above tolerance {tol:.3e} after {panels} panels (best value {value})")]
    Quadrature {
        value: f64,
        achieved: f64,
        tol: f64,
        panels: usize,
    },

    /// An internal consistency guard fired (a value that the theory forbids).
    #[error("numerical guard: {0}")]
    Numerical(String),

    /// The argument-principle contour passes too close to a zero.
    #[error("contour passes within {min_abs:.3e} of a zero of f; perturb the rectangle")]
    ContourNearZero { min_abs: f64 },
}

impl Error {
    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::HypergeometricPole { .. })
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
