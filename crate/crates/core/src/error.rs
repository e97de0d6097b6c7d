//! Crate-wide error type.

use std::fmt;

/// Errors raised by the library.
///
/// Solver outcomes (`infeasible`, `max-iterations`) are *statuses* on
/// [`crate::qpcore::QpSolution`], not errors; they only become errors when a
/// controller cannot act on them.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Hankel depth outside `1..=N`, or a past/future split deeper than the data.
    InvalidDepth { depth: usize, len: usize },
    /// Two objects that must agree in size do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    /// A sequence or matrix contains NaN or infinite entries.
    NonFinite { what: &'static str },
    /// An initialization window is shorter than the model lag requires.
    InitWindowTooShort { required: usize, actual: usize },
    /// A simulated state stopped being finite.
    Divergence { step: usize },
    /// Recorded data failed the persistency-of-excitation test.
    ExcitationInsufficient {
        order: usize,
        required_rank: usize,
        achieved_rank: usize,
    },
    /// A dictionary without a passing excitation certificate was used.
    UncertifiedDictionary,
    /// The requested past/future windows are not a trajectory of the
    /// data-generating system.
    InconsistentTrajectory { residual: f64, tol: f64 },
    /// The control QP has no feasible point at the given step.
    Infeasible { step: usize },
    /// A CSV or key-value file could not be parsed.
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDepth { depth, len } => {
                write!(f, "invalid Hankel depth {depth} for sequence of length {len}")
            }
            Error::DimensionMismatch {
                what,
                expected,
                actual,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, got {actual}"),
            Error::NonFinite { what } => write!(f, "non-finite values in {what}"),
            Error::InitWindowTooShort { required, actual } => write!(
                f,
                "initialization window too short: need {required} steps, got {actual}"
            ),
            Error::Divergence { step } => {
                write!(f, "simulation diverged (non-finite state) at step {step}")
            }
            Error::ExcitationInsufficient {
                order,
                required_rank,
                achieved_rank,
            } => write!(
                f,
                "excitation insufficient: persistency of excitation of order {order} \
                 needs rank {required_rank}, achieved {achieved_rank}"
            ),
            Error::UncertifiedDictionary => {
                write!(f, "data dictionary has no passing excitation certificate")
            }
            Error::InconsistentTrajectory { residual, tol } => write!(
                f,
                "windows are not a trajectory of the data-generating system \
                 (residual {residual:.3e} exceeds tolerance {tol:.3e})"
            ),
            Error::Infeasible { step } => {
                write!(f, "control problem infeasible at step {step}")
            }
            Error::Parse {
                line,
                column,
                message,
            } => write!(f, "parse error at line {line}, column {column}: {message}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
