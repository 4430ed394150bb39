use thiserror::Error;

/// Errors raised by the optimization core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid noise table length {0}")]
    InvalidLength(usize),
    #[error("population size {0} is odd; mirrored sampling needs an even population")]
    OddPopulation(usize),
    #[error("noise table of length {table_len} cannot hold slices of dimension {dim}")]
    TableTooShort { table_len: usize, dim: usize },
    #[error("perturbation offset {offset} + dim {dim} exceeds table length {table_len}")]
    OffsetOutOfRange { offset: usize, dim: usize, table_len: usize },
    #[error("need at least {min} samples, got {actual}")]
    TooFewSamples { min: usize, actual: usize },
    #[error("length mismatch: {what} has {actual} entries, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, actual: usize },
    #[error("non-finite gradient entry at index {0}")]
    NonFiniteGradient(usize),
    #[error("invalid sigma {0}; must be positive and finite")]
    InvalidSigma(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("generation {generation}: {source}")]
    Generation {
        generation: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
