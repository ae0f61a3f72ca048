use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("point {point:?} lies outside the domain")]
    PointOutsideDomain { point: [f64; 3] },

    #[error("radius under-resolved: r = {r} must exceed 2h = {two_h}")]
    RadiusUnderResolved { r: f64, two_h: f64 },

    #[error("alpha out of range: {0} (expected (0, 2])")]
    AlphaOutOfRange(f64),

    #[error("under-resolved domain: {0}")]
    UnderResolved(String),

    #[error("unresolved frequency: |xi| h = {0} exceeds 1")]
    UnresolvedFrequency(f64),

    #[error("eigensolver did not converge after {iterations} iterations (last residual {residual:e})")]
    SolverDidNotConverge { iterations: usize, residual: f64 },

    #[error("null eigenfunction")]
    NullEigenfunction,

    #[error("division by zero trial: trial function vanishes at interior node {node}")]
    ZeroTrialFunction { node: usize },

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
