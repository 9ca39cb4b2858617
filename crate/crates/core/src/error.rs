use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mesh needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("nodes too close: minimum gap {gap:e} below threshold {threshold:e}")]
    DuplicateNodes { gap: f64, threshold: f64 },
    #[error("bad interval [{a}, {b}]: need finite a < b")]
    BadInterval { a: f64, b: f64 },
    #[error("non-finite node value {0}")]
    NonFiniteNode(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Kronecker power would have {rows} rows, cap is {cap}")]
    SizeCapExceeded { rows: usize, cap: usize },
    #[error("operation undefined for the zero loop element")]
    ZeroElement,
    #[error("top coefficient is not the identity matrix")]
    TopNotIdentity,
    #[error("truncation order must be positive")]
    TruncationTooSmall,
    #[error("degree {degree} times p = {p} is not divisible by q = {q}")]
    FractionalDegree { degree: i32, p: i32, q: u32 },
    #[error("direction changes the top degree {degree} of the base point")]
    DegreeChanged { degree: i32 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
