use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid ray descriptor: {0}")]
    InvalidRay(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("arccos argument {0} lies outside [-1, 1] beyond rounding tolerance")]
    NumericalDomain(f64),

    #[error("scale order violated: target scale {target} exceeds source scale {from}")]
    OrderViolation { from: f64, target: f64 },

    #[error("empty schedule")]
    EmptySchedule,

    #[error("schedule is not a strictly increasing positive sequence at index {0}")]
    InvalidSchedule(usize),

    #[error("sequence value at index {index} is {value}, below its divergence certificate {bound}")]
    CertificateViolated { index: u64, value: f64, bound: f64 },

    #[error("sequence index {0} is outside the evaluated range")]
    IndexOutOfRange(u64),

    #[error("ray family does not converge to the target: offending index {index} ({reason})")]
    NonConvergentFamily { index: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("map is not a quasi-isometry on the working range: {0}")]
    NotQuasiIsometric(String),

    #[error("quasi-inverse check failed: {0}")]
    QuasiInverse(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Whether the error comes from malformed input rather than from a
    /// computation that failed on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidPoint(_)
                | Error::InvalidRay(_)
                | Error::InvalidTree(_)
                | Error::InvalidParameter { .. }
                | Error::EmptySchedule
                | Error::InvalidSchedule(_)
                | Error::Unsupported(_)
                | Error::Io(_)
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
