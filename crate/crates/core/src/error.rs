use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,

    #[error("rows {0} and {1} are parallel")]
    ParallelRows(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate angle: {0}")]
    DomainError(String),

    #[error("family {family} needs k >= 6, got k = {k}")]
    UnsupportedK { family: String, k: usize },

    #[error("matrix does not carry the expected pattern: {0}")]
    PatternMismatch(String),

    #[error("no isotropy pattern recognized; cannot restrict to a fixed-point space")]
    UnrecognizedIsotropy,

    #[error("Newton iteration stalled after {iterations} steps at gradient norm {grad_norm:.3e}")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("restricted Hessian is singular")]
    SingularRestrictedHessian,

    #[error("no isotypic decomposition for k = {k}, p = {p}, q = {q}")]
    UnsupportedShape { k: usize, p: usize, q: usize },

    #[error("representatives of {0} are linearly dependent")]
    RankDeficientRepresentatives(String),

    #[error("operator is not equivariant on {component}: residual {residual:.3e}")]
    EquivarianceViolation { component: String, residual: f64 },

    #[error("probe entry vanishes for {0}")]
    ZeroProbeEntry(String),

    #[error("matrix is not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),

    #[error("spectra have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("histogram range is empty or bin count is zero")]
    EmptyRange,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
