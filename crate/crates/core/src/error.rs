use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: non-numeric probability {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbabilityRange { line: usize, value: f64 },
    #[error("line {line}: row sums to {sum}, expected 1")]
    RowSum { line: usize, sum: f64 },
    #[error("duplicate alphabet letter {0:?}")]
    DuplicateLetter(String),
    #[error("line {line}: expected {expected} values, found {found}")]
    RowWidth {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("letter {0:?} is not in the alphabet")]
    UnknownLetter(String),
    #[error("position {pos} out of range for length {len} in a string of length {n}")]
    OutOfRange { pos: usize, len: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pattern of length {m} is shorter than ell = {ell}")]
    PatternTooShort { m: usize, ell: usize },
    #[error("index scheme mismatch: {0}")]
    SchemeMismatch(String),
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
