use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {got}")]
    InvalidDimension { got: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not upper triangular: nonzero entry at ({row}, {col})")]
    NotUpperTriangular { row: usize, col: usize },

    #[error("zero diagonal entry at position {0}")]
    ZeroDiagonal(usize),

    #[error("upper triangular factor is singular: zero diagonal at position {0}")]
    SingularUhat(usize),

    #[error("elimination broke down: pivot {0} is zero or not finite")]
    PivotBreakdown(usize),

    #[error("matrix is singular: no nonzero pivot candidate in column {0}")]
    SingularMatrix(usize),

    #[error("value {0} does not fit the target regime")]
    Overflow(String),

    #[error("mantissa width must be at least {min} bits, got {got}")]
    InvalidPrecision { got: u32, min: u32 },

    #[error("index ({i}, {j}) out of range for dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("matrix is not a row-permuted, sign-flipped maximal-growth matrix: {0}")]
    NotHighamForm(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("iteration did not converge after {iterations} steps (best estimate {estimate})")]
    NoConvergence { estimate: f64, iterations: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
