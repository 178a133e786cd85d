use thiserror::Error;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("round {round}: {what} is not a member of its polytope")]
    InvalidPlay { round: usize, what: &'static str },

    /// The constraint mixture has no action satisfying it against every loss,
    /// which certifies that the approachability instance is not approachable.
    #[error("instance is not approachable: no action satisfies constraint mixture {coeffs:?}")]
    NotApproachable { coeffs: Vec<Rational> },

    #[error("operation requires a proper instance, got {0}")]
    NotProper(String),

    #[error("weight {index} is not positive ({value})")]
    NonPositiveWeight { index: usize, value: Rational },

    #[error("ball support in direction {index} is not positive")]
    DegenerateBall { index: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("action set is full-dimensional; the shared left-kernel test does not apply")]
    KernelTestInapplicable,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }
}

pub(crate) fn ensure_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::dim(context, expected, actual))
    }
}
