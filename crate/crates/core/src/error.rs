use thiserror::Error;

/// Errors produced by the solver and its building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {t} lies outside [-1, 1]")]
    Domain { t: f64 },

    #[error("{what} did not converge after {limit} {unit}")]
    NoConvergence {
        what: &'static str,
        limit: usize,
        unit: &'static str,
    },

    #[error("matrix is numerically singular: pivot {pivot:e} at step {step}")]
    Singular { step: usize, pivot: f64 },

    #[error("invalid size: {0}")]
    Size(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reference coefficients are all zero")]
    ZeroReference,
}

pub type Result<T> = std::result::Result<T, Error>;
