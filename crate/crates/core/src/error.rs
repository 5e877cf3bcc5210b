use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidArgument(String),
    UnsupportedDegree {
        method: &'static str,
        degree: usize,
        minimum: usize,
    },
    SolverFailure(String),
    /// The residual is not orthogonal to the hat function of `vertex`.
    PreconditionViolated {
        vertex: usize,
        residual: f64,
        scale: f64,
    },
    /// The exact solution is not available for this problem.
    Unavailable,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::UnsupportedDegree {
                method,
                degree,
                minimum,
            } => write!(
                f,
                "unsupported degree {degree} for {method} (minimum is {minimum})"
            ),
            Error::SolverFailure(msg) => write!(f, "solver failure: {msg}"),
            Error::PreconditionViolated {
                vertex,
                residual,
                scale,
            } => write!(
                f,
                "residual not orthogonal to hat function at vertex {vertex}: r_a = {residual:e} (scale {scale:e})"
            ),
            Error::Unavailable => write!(f, "exact solution unavailable"),
        }
    }
}

impl core::error::Error for Error {}
