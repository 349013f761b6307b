//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by norm evaluation, projection solvers and model-space
/// geometry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("metric tensor undefined at the zero vector")]
    UndefinedTensor,

    #[error("zero vector where a non-zero vector is required")]
    ZeroVector,

    #[error("unsupported for this variant: {0}")]
    UnsupportedVariant(String),

    #[error("clip region misses the set or bracket expansion failed: {0}")]
    ClipMiss(String),

    #[error("curvature mismatch: {0} vs {1}")]
    KappaMismatch(f64, f64),

    #[error("antipodal endpoints: minimizing geodesic is not unique")]
    Antipodal,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("outside the projection regime: {0}")]
    Regime(String),

    #[error("scale bound violated: {0}")]
    ScaleBound(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
