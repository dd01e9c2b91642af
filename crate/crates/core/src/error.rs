use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} has non-positive Jacobian determinant {det:e}")]
    NonPositiveJacobian { cell: usize, det: f64 },

    #[error("invalid perturbation amplitude {0}: must satisfy 0 <= amplitude < 0.5")]
    InvalidAmplitude(f64),

    #[error("{path}:{line}: {msg}")]
    MshParse { path: PathBuf, line: usize, msg: String },

    #[error("unsupported element type {0}")]
    UnsupportedElementType(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("Newton inversion did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonNoConvergence { iterations: usize, residual: f64 },

    #[error("point {index} at {point:?} is outside the padded domain")]
    OutsidePaddedDomain { index: usize, point: [f64; 3] },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("unknown boundary id {0}")]
    UnknownBoundaryId(u32),

    #[error("matrix too large for explicit assembly: {n} > {limit}")]
    TooLargeForAssembly { n: usize, limit: usize },

    #[error("incompatible spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("meshes are not nested: {0}")]
    NotNested(String),

    #[error("polynomial coarsening needs degree >= 2, got {0}")]
    DegreeTooLow(usize),

    #[error("coarse matrix is singular (pivot {pivot:e} at row {row}); pin the nullspace, e.g. with a Dirichlet boundary")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("operator is not positive definite: p^T A p = {0:e}")]
    Indefinite(f64),

    #[error("cannot split {cells} cells across {ranks} ranks")]
    TooManyRanks { ranks: usize, cells: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}
