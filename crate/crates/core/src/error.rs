use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("zero vector passed where a direction is required")]
    ZeroVector,

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: &'static str, residual: f64 },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape has empty interior")]
    EmptyInterior,

    #[error("point is not on the boundary (distance {0:.3e})")]
    NotOnBoundary(f64),

    #[error("not an Alexandrov point: {0}")]
    NotAlexandrov(String),

    #[error("invalid normal: δ(a + sη) = {delta:.3e} < s = {s:.3e}")]
    InvalidNormal { s: f64, delta: f64 },

    #[error("finite-difference stencil lost projection uniqueness near {0:?}")]
    ProjectionNoise(Vec<f64>),

    #[error("curvature mismatch between probes r and 2r (max deviation {0:.3e})")]
    InvarianceViolation(f64),

    #[error("stratum {0} present in the shape has no bundle samples")]
    StrataCoverageGap(usize),

    #[error("precondition failed: {reason}")]
    PreconditionFailed { reason: String, witnesses: Vec<Vec<f64>> },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl Error {
    pub(crate) fn precondition(reason: impl Into<String>) -> Self {
        Error::PreconditionFailed {
            reason: reason.into(),
            witnesses: Vec::new(),
        }
    }
}
