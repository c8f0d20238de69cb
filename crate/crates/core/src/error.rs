use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),

    #[error("document {0:?} has empty title and snippet")]
    EmptyDocument(String),

    #[error("empty search pattern")]
    EmptyPattern,

    #[error("duplicate pattern term {0:?}")]
    DuplicatePatternTerm(String),

    #[error("document {0:?} is not in the result set")]
    NotInResults(String),

    #[error("document not in population results: {0:?}")]
    NotInPopulation(String),

    #[error("population constraint N < |K|/2 violated: N = {n}, |K| = {pattern}")]
    PopulationConstraint { n: usize, pattern: usize },

    #[error("genome size mismatch: {0}")]
    SizeMismatch(String),

    #[error("genome has repeated term {0:?}")]
    RepeatedTerm(String),

    #[error("selection pool of {pool} genomes is smaller than n = {n}")]
    PoolTooSmall { pool: usize, n: usize },

    #[error("value {value} outside normalization range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("query returned no results")]
    NoResults,

    #[error("cannot average an empty list of query fitness values")]
    EmptyPopulation,

    #[error("invalid weight vector ({0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),

    #[error("invalid criterion samples: {0}")]
    InvalidSamples(String),

    #[error("method 1 requires positive criterion maxima")]
    NonPositiveMaximum,

    #[error("method 2 requires nonnegative criterion minima")]
    NegativeMinimum,

    #[error("empty data range")]
    EmptyRange,

    #[error("invalid data range {0:?}; expected all, population:<p> or query:<p>:<q>")]
    BadRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("log line {line}, column {column}: {message}")]
    Log {
        line: usize,
        column: String,
        message: String,
    },

    #[error("search backend: {0}")]
    Backend(String),

    #[error("empty log")]
    EmptyLog,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
