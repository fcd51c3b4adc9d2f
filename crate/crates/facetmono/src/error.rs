use thiserror::Error;

/// Errors shared across the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A distribution or run parameter is outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An evaluation point is outside the support or domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested value is beyond the representable range (e.g. a
    /// heavy-tail quantile past the floating-point floor of the tail mass).
    #[error("range error: {0}")]
    Range(String),

    /// Input violates a structural precondition (e.g. too few points for a
    /// hull, or a non-concave kernel where concavity is required).
    #[error("precondition error: {0}")]
    Precondition(String),

    /// Adaptive quadrature did not reach the requested tolerance. Carries the
    /// best estimate and its error bound so callers can decide what to do.
    #[error("quadrature did not converge: estimate {estimate} +- {error_bound}")]
    QuadratureNoConvergence { estimate: f64, error_bound: f64 },

    /// A Monte Carlo replicate stayed degenerate after the retry cap.
    #[error("replicate {replicate} degenerate after {retries} resampling attempts")]
    DegenerateReplicate { replicate: u64, retries: u32 },

    /// Two numeric routes that must agree disagreed beyond tolerance; this
    /// signals an implementation or conditioning problem, not bad input.
    #[error("numeric inconsistency: {0}")]
    Numeric(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
