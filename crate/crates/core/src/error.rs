use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shift coordinate {index} = {value} is outside [0, {bound}]")]
    ShiftOutOfRange {
        index: usize,
        value: u64,
        bound: u64,
    },

    #[error("enumerating {points} points exceeds the ceiling of {ceiling} (n = {n}, q = {q})")]
    ResourceCeiling {
        points: String,
        ceiling: u64,
        n: usize,
        q: u32,
    },

    #[error("state is not normalized: squared norm = {0}")]
    Unnormalized(f64),

    #[error("zero shift: {0}")]
    ZeroShift(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty sample list")]
    EmptySamples,

    #[error("no candidate survived the disequation filter at tolerance {0}")]
    NoCandidate(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceCeiling { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
