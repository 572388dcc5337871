use thiserror::Error;

/// Errors reported by the library. Indices in messages are 1-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) is out of range for a {n}x{n} matrix", row = .row + 1, col = .col + 1)]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("entries ({row}, {col}) and ({col}, {row}) disagree", row = .row + 1, col = .col + 1)]
    AsymmetricDuplicate { row: usize, col: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("entry ({row}, {col}) of the matrix is not in the fill pattern", row = .row + 1, col = .col + 1)]
    PatternMismatch { row: usize, col: usize },

    #[error("pivot breakdown at column {col}: |D| = {magnitude:e} is below the floor {floor:e}", col = .column + 1)]
    PivotBreakdown { column: usize, magnitude: f64, floor: f64 },

    #[error("matrix of size {n} exceeds the dense oracle cap {cap}")]
    OracleCap { n: usize, cap: usize },

    #[error("matrix is numerically singular at elimination step {col}", col = .column + 1)]
    Singular { column: usize },

    #[error("matrix is not real symmetric")]
    NotRealSymmetric,

    #[error("estimated norm of the dropped entries {norm:e} is not below the spectral distance {delta:e}")]
    HypothesisViolated { norm: f64, delta: f64 },

    #[error("entry ({row}, {col}) is not covered by the supplied level pattern", row = .row + 1, col = .col + 1)]
    SupportNotCovered { row: usize, col: usize },

    #[error("decay fit needs at least {needed} distance bins above the floor, found {found}")]
    InsufficientBins { needed: usize, found: usize },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("invalid spectral set: {0}")]
    InvalidSpectralSet(String),

    #[error("point {re} + {im}i lies on the spectral set")]
    PointOnSpectralSet { re: f64, im: f64 },

    #[error("invalid pole expansion: {0}")]
    InvalidPoles(String),

    #[error("pole {index}: {source}", index = .index + 1)]
    Pole {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
