use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A family parameter lies outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A structural argument (degree, derivative order, interval) is invalid.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Christoffel-Darboux ratio was requested too close to the diagonal,
    /// where cancellation dominates; callers should use the direct sum.
    #[error("points too close to the diagonal (|x-y| = {sep:.3e} < guard {guard:.3e}); use the direct kernel sum")]
    NearDiagonal { sep: f64, guard: f64 },

    /// A quantity that must be positive came out non-positive beyond the
    /// roundoff tolerance; this signals a kernel or formula bug upstream.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// An intermediate value violated a structural identity of the two-point
    /// intensity formula (e.g. a correlation outside [-1, 1]).
    #[error("formula inconsistency: {0}")]
    FormulaInconsistency(String),

    /// Adaptive quadrature hit its refinement cap before reaching the target
    /// accuracy; the partial result and the error estimate are reported.
    #[error("accuracy not reached: estimated error {error:.3e} on partial result {partial:.9e}")]
    AccuracyNotReached { partial: f64, error: f64 },

    /// A statistical routine was given too few samples.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An input that is a probability-zero degenerate case was supplied.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
