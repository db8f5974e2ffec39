use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Reference to a voter or candidate that does not exist, or a malformed set.
    #[error("structural error: {0}")]
    Structural(String),

    /// The election data itself violates a model invariant.
    #[error("invalid election: {0}")]
    InvalidElection(String),

    /// A caller-supplied parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The operation is only defined for a narrower class of elections.
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance is larger than the configured search bound.
    #[error("refused: {what} is {actual}, bound is {bound}")]
    Refused {
        what: String,
        actual: usize,
        bound: usize,
    },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// The epsilon-perturbation loop did not settle on a limit outcome.
    #[error(
        "limit outcome did not stabilize after {halvings} halvings (last eps {last_eps}); \
         last two elected sequences: {previous:?} vs {current:?}"
    )]
    NoStabilization {
        halvings: u32,
        last_eps: Rational,
        previous: Vec<String>,
        current: Vec<String>,
    },

    /// A construction that should be impossible to fail failed.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
