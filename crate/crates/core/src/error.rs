use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A density violates a construction invariant.
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    /// The operation needs a mixture-backed density (or a 1-D one).
    #[error("unsupported density family for {0}")]
    UnsupportedFamily(&'static str),

    #[error("conditioning on X_t is degenerate at t = 0")]
    DegenerateConditioning,

    /// A numerical estimate did not reach the requested accuracy.
    #[error("{what}: achieved error {achieved:.3e} exceeds tolerance {tolerance:.3e}")]
    ToleranceExceeded { what: &'static str, achieved: f64, tolerance: f64 },

    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A mathematical inequality failed beyond its tolerance. This always
    /// points at an implementation bug.
    #[error("inequality violated: {what} (lhs {lhs:.12e}, rhs {rhs:.12e})")]
    InequalityViolation { what: String, lhs: f64, rhs: f64 },

    #[error("unsupported test function kind for {0}")]
    UnsupportedKind(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
