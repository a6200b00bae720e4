// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("factorization failed: {0}")]
    FactorizationFailure(String),

    /// Adaptive quadrature hit its subdivision limit.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}{}", .index.map(|i| format!(" (term {i})")).unwrap_or_default())]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        index: Option<usize>,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("saddlepoint failure at u = {u}: {reason} (u0 = {u0}, bracket = [{lower}, {upper}])")]
    SaddleFailure {
        u: f64,
        u0: f64,
        lower: f64,
        upper: f64,
        reason: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidArgument(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Self::DegenerateInput(msg.into())
    }

    /// Attaches the conditioning term index to a quadrature failure.
    pub fn at_index(self, i: usize) -> Self {
        match self {
            Self::QuadratureFailure { estimate, error, .. } => Self::QuadratureFailure {
                estimate,
                error,
                index: Some(i),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
