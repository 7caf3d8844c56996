use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("mesh size h={h} too large, need h <= {max}")]
    MeshTooCoarse { h: f64, max: f64 },
    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("near-singular pivot {pivot:e} at row {row}")]
    SingularPivot { row: usize, pivot: f64 },
    #[error("eigensolver did not converge: found {found} of {wanted}, worst residual {residual:e}")]
    NoConvergence { found: usize, wanted: usize, residual: f64 },
    #[error("under-resolved mesh: h={h} but the mode needs h <= {required}")]
    UnderResolved { h: f64, required: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("eigenpairs come from different spectral windows")]
    MismatchedWindows,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("boundary mass is singular (empty boundary)")]
    EmptyBoundary,
}

pub type Result<T> = std::result::Result<T, LabError>;
