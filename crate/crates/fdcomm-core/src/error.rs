use core::fmt;

/// Errors raised by parameter validation and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented domain.
    InvalidParameter(&'static str),
    /// The requested evaluation needs a finite inverse temperature.
    InfiniteBeta,
    /// The parameters fall outside the hypothesis of the envelope theorem.
    OutsideHypothesis(&'static str),
    /// An exact integer result does not fit.
    Overflow,
    /// A lattice or series sum exceeded its term budget before the tail bound
    /// met the requested tolerance.
    Budget { terms: u64, relative_tail: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::InfiniteBeta => f.write_str("operation requires finite beta"),
            Error::OutsideHypothesis(what) => write!(f, "outside theorem hypothesis: {what}"),
            Error::Overflow => f.write_str("integer overflow"),
            Error::Budget {
                terms,
                relative_tail,
            } => write!(
                f,
                "term budget exhausted after {terms} terms (relative tail {relative_tail:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}
