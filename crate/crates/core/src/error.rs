//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, evaluation, sweeps and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (non-finite entries, duplicate frequencies, bad shapes).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Not enough samples for the requested operation.
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A Loewner denominator s_a[j] - s_b[i] vanished.
    #[error("singular Loewner denominator: s_a[{a_index}] equals s_b[{b_index}]")]
    SingularDenominator { a_index: usize, b_index: usize },

    /// Every candidate expansion point produced a numerically unusable pencil.
    #[error("no valid expansion point: pencil singular or ill-conditioned at every candidate")]
    NoValidExpansionPoint,

    /// The resolvent (sE - A) could not be solved at this frequency.
    #[error("evaluation singularity at {f_hz} Hz")]
    EvaluationSingularity { f_hz: f64 },

    /// Every grid point is already excluded by existing samples.
    #[error("test grid exhausted: no admissible frequency left to sample")]
    GridExhausted,

    /// Strict tabulated oracle queried off its stored grid.
    #[error("off-grid query at {requested_hz} Hz; nearest stored frequencies: {below_hz:?}, {above_hz:?}")]
    OffGrid {
        requested_hz: f64,
        below_hz: Option<f64>,
        above_hz: Option<f64>,
    },

    /// Solver oracle failure, carrying the offending frequency.
    #[error("solver failure at {f_hz} Hz: {reason}")]
    Solver { f_hz: f64, reason: String },

    /// Touchstone parse failure, carrying the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical routine failed to converge or produced non-finite output.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Ill-formed network topology.
    #[error("topology error: {0}")]
    Topology(String),
}

pub type Result<T> = std::result::Result<T, Error>;
