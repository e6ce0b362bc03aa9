use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (max |M - M^dag| = {violation:.3e}, tolerance {tol:.1e})")]
    NotHermitian { violation: f64, tol: f64 },

    #[error("matrix is rank deficient (smallest singular value {0:.3e})")]
    RankDeficient(f64),

    #[error("eigendecomposition failed to converge")]
    NoConvergence,

    #[error("not a complex Hadamard matrix (max violation {0:.3e})")]
    InvalidHadamard(f64),

    #[error("not a unitary error basis (max violation {0:.3e})")]
    InvalidUeb(f64),

    #[error("matrix is not unitary up to scale (max violation {0:.3e})")]
    NotUnitary(f64),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("state has zero norm after preparation")]
    DegenerateState,

    #[error("Weingarten Gram matrix is singular: d = {d} < m = {m}")]
    DimensionTooSmall { m: usize, d: usize },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("invalid MPS: {0}")]
    InvalidMps(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("consistency check failed: {0}")]
    Check(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
