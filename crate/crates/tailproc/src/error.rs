use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A path must contain at least one nonzero value.
    #[error("paths must have at least one nonzero value")]
    ZeroPath,
    /// Path values and probabilities must be finite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// Shift-and-rescale pivot is zero.
    #[error("cannot rescale by the value at index {index}: it is zero")]
    ZeroPivot { index: i32 },
    /// Law probabilities are invalid or do not sum to one.
    #[error("invalid probability weights: {0}")]
    BadProbability(String),
    /// The tail index must be a positive finite real.
    #[error("tail index alpha must be positive and finite, got {0}")]
    BadAlpha(f64),
    /// A test functional returned a nonzero value on a path that vanishes at time 0.
    #[error("functional must vanish on paths with value 0 at time 0")]
    ContractViolation,
    /// No observation strictly exceeds the threshold.
    #[error("degenerate threshold: no strict exceedance in the core range")]
    DegenerateThreshold,
    /// The series does not carry enough padding for the requested windows.
    #[error("series padding too small: need {needed} on each side, have {available}")]
    PaddingViolation { needed: usize, available: usize },
    /// Asymptotic variance formulas require an RS-invariant law.
    #[error("law is not RS-invariant (total variation {tv:.3e} above tolerance {tol:.1e})")]
    NotASpectralLaw { tv: f64, tol: f64 },
    /// The boundary of the evaluation set carries an atom of the marginal law.
    #[error("set boundary {x} is an atom of the lag-{lag} marginal; result would be ambiguous")]
    BoundaryAtom { x: f64, lag: i32 },
    /// A log-moment in the backward variance diverges.
    #[error("E[log|theta_i| 1_A] diverges: the set contains 0 and the lag-{lag} marginal has mass there")]
    DivergentLogMoment { lag: i32 },
    /// Too few conditioning events for a conditional cdf.
    #[error("too few conditioning events: got {got}, need at least {need}")]
    TooFewExceedances { got: usize, need: usize },
    /// The benchmark reference cdf could not be produced.
    #[error("reference cdf unavailable: {0}")]
    ReferenceUnavailable(String),
    /// Every Monte Carlo replication failed.
    #[error("all {0} replications failed (degenerate thresholds)")]
    AllReplicationsFailed(usize),
    /// Malformed law file, config file or command-line grammar.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
