use alloc::string::String;
use core::fmt;

/// Errors raised by the numeric, network, and experiment routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands disagree on a length or shape.
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    /// A hyperparameter or distribution parameter is out of range.
    InvalidParameter { name: &'static str, reason: String },
    /// An operation that needs at least one element got none.
    Empty(&'static str),
    /// A required dataset split is absent or empty.
    MissingSplit(&'static str),
    /// A feature-space augmentation was requested without a decoder or feature block.
    MissingFeatures(&'static str),
    /// Training produced a non-finite or exploding loss.
    Divergence { epoch: usize, loss: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(op: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            op,
            expected,
            found,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                op,
                expected,
                found,
            } => write!(f, "{op}: dimension mismatch (expected {expected}, found {found})"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::MissingSplit(split) => write!(f, "dataset has no `{split}` split"),
            Error::MissingFeatures(what) => write!(f, "feature-space augmentation needs {what}"),
            Error::Divergence { epoch, loss } => {
                write!(f, "training diverged at epoch {epoch} (loss = {loss})")
            }
        }
    }
}

impl core::error::Error for Error {}
