//! Error type shared by the core routines.

use alloc::string::String;
use core::fmt;

/// Errors produced by numeric routines and model construction.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A matrix or vector argument had the wrong shape.
    DimensionMismatch {
        /// What was being computed.
        context: &'static str,
        /// Expected dimension description.
        expected: String,
        /// Actual dimension description.
        actual: String,
    },
    /// A linear solve hit a (near-)singular pivot.
    SingularMatrix {
        /// What was being solved.
        context: &'static str,
    },
    /// A matrix expected to be symmetric positive definite was not.
    NotPositiveDefinite {
        /// Leading minor index at which the Cholesky factorization failed.
        minor: usize,
    },
    /// A state or derivative became non-finite during integration.
    NonFiniteState {
        /// Time at which the non-finite value appeared.
        t: f64,
        /// Index of the offending state component.
        index: usize,
    },
    /// An internal invariant was breached, e.g. an adaptive estimate was
    /// found outside its inflated projection set.
    StateCorruption {
        /// What was found corrupted.
        context: &'static str,
    },
    /// A configuration value was rejected.
    InvalidConfig {
        /// Dotted path of the offending field.
        field: String,
        /// Why it was rejected.
        reason: String,
    },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DimensionMismatch {
                context,
                expected,
                actual,
            } => write!(
                f,
                "dimension mismatch in {context}: expected {expected}, got {actual}"
            ),
            CoreError::SingularMatrix { context } => {
                write!(f, "singular matrix in {context}")
            }
            CoreError::NotPositiveDefinite { minor } => {
                write!(f, "matrix is not positive definite (leading minor {minor})")
            }
            CoreError::NonFiniteState { t, index } => {
                write!(f, "non-finite state component {index} at t = {t}")
            }
            CoreError::StateCorruption { context } => {
                write!(f, "internal state invariant breached: {context}")
            }
            CoreError::InvalidConfig { field, reason } => {
                write!(f, "invalid config value at `{field}`: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}
