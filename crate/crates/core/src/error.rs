use thiserror::Error;

/// Errors raised by the transforms, subdifferential routines and verifiers.
///
/// The variant names double as the error names printed by the CLI when a
/// scope or hypothesis violation aborts a run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("improper function: {0}")]
    ImproperFunction(String),

    #[error("convex envelope is improper (no affine minorant)")]
    EnvelopeImproper,

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("point outside the effective domain: {0}")]
    Domain(String),

    #[error("not an epsilon-subgradient: gap {gap} exceeds epsilon {epsilon}")]
    NotEpsSubgradient { gap: f64, epsilon: f64 },

    #[error("unbounded linear program: {0}")]
    Unbounded(String),

    #[error("invalid subgradient oracle: {0}")]
    InvalidOracle(String),

    #[error("outside the scope of the check: {0}")]
    Scope(String),

    #[error("hypothesis failed: {clause}")]
    Hypothesis { clause: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program failure: {0}")]
    Lp(String),
}

impl Error {
    /// Stable identifier used in reports and exit diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "DimensionError",
            Error::ImproperFunction(_) => "ImproperFunctionError",
            Error::EnvelopeImproper => "EnvelopeImproperError",
            Error::EmptyDomain(_) => "EmptyDomainError",
            Error::Domain(_) => "DomainError",
            Error::NotEpsSubgradient { .. } => "NotEpsSubgradientError",
            Error::Unbounded(_) => "UnboundedError",
            Error::InvalidOracle(_) => "InvalidOracleError",
            Error::Scope(_) => "ScopeError",
            Error::Hypothesis { .. } => "HypothesisError",
            Error::InvalidGrid(_) => "InvalidGridError",
            Error::InvalidArgument(_) => "InvalidArgumentError",
            Error::Lp(_) => "LpError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
