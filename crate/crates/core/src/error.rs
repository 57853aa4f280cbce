use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised while building or evaluating Lagrangian geometry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A partial function (log, sqrt, division, fractional power) was applied
    /// outside its domain.
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    /// The fiber Hessian is (numerically) singular at the evaluation point.
    #[error("degenerate Lagrangian: {object} has |det| = {det:e} <= threshold {threshold:e}")]
    DegenerateLagrangian {
        object: String,
        det: f64,
        threshold: f64,
    },

    #[error("Lagrangian is not homogeneous in the fiber coordinates")]
    NotHomogeneous,

    #[error("Lagrangian vanishes at the sample point; homogeneity ratio undefined")]
    ZeroLagrangianValue,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(expr: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            expr: expr.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
