use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("core index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is not upper Hessenberg (defect {defect:.3e})")]
    NotHessenberg { defect: f64 },

    #[error("matrix is not upper triangular (defect {defect:.3e})")]
    NotTriangular { defect: f64 },

    #[error("turnover expects indices (i-1, i, i-1), got ({0}, {1}, {2})")]
    IndexPatternMismatch(usize, usize, usize),

    #[error("upper-triangular factor is singular at diagonal position {0}")]
    SingularTriangular(usize),

    #[error("core pattern is not a full shape: {0}")]
    NotAFullShape(String),

    #[error("2x2 block is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is numerically singular: {0}")]
    Singular(&'static str),

    #[error("structure mismatch: {0}")]
    StructureMismatch(String),

    #[error("pencil is improper at column {0}")]
    ImproperPencil(usize),

    #[error("turnover chain broke down at index {0}")]
    TurnoverBreakdown(usize),

    #[error("pole {pole} lies on the spectrum (shifted system singular)")]
    PoleOnSpectrum { pole: String },

    #[error("invalid pole: {0}")]
    InvalidPole(String),

    #[error("continuation pair at step {0} coincides with the pole")]
    InadmissibleContinuation(usize),

    #[error("tridiagonal column {column} could not be formed (null-space ratio {ratio:.3e})")]
    RlSplitBreakdown { column: usize, ratio: f64 },

    #[error("singular pencil: T and S share a null direction")]
    SingularPencil,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
