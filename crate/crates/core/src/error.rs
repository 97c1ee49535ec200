use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(&'static str),
    /// A relay with a zero channel or zero power budget has no φ-statistic.
    DegenerateRelay,
    /// The exhaustive oracle was asked for more work than it will do.
    ResourceLimit { evaluations: u128, limit: u128 },
    /// A scheme needs a link that the channel realization does not carry.
    SchemeMismatch(&'static str),
    /// A feedback message could not be decoded.
    Protocol(&'static str),
    /// Not enough usable points to estimate a quantity from a curve.
    Estimation(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DegenerateRelay => f.write_str("degenerate relay (zero channel or zero budget)"),
            Error::ResourceLimit { evaluations, limit } => {
                write!(f, "grid would need {evaluations} evaluations, limit is {limit}")
            }
            Error::SchemeMismatch(msg) => write!(f, "scheme/topology mismatch: {msg}"),
            Error::Protocol(msg) => write!(f, "feedback protocol error: {msg}"),
            Error::Estimation(msg) => write!(f, "estimation error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
