use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model schema error: {0}")]
    Schema(String),

    #[error("model is invalid: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("inconsistent statistics: configuration {index} has {count} events but zero duration")]
    InconsistentStats { index: usize, count: u64 },

    #[error("rate array arity mismatch for node `{node}`: got {got}, expected {expected}")]
    RateArity {
        node: String,
        got: usize,
        expected: usize,
    },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("search did not converge within {0} moves")]
    SearchDiverged(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("benchmark error: {0}")]
    Benchmark(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
