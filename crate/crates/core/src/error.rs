use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid block: {0}")]
    InvalidBlock(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("evaluation produced a non-finite value: {0}")]
    Evaluation(String),

    #[error("evaluation failed at iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("matrix has no nonzero singular value")]
    NoNonzeroSingularValue,

    #[error("too many blocks to enumerate: C({n},{q}) exceeds {limit}")]
    TooManyBlocks { n: usize, q: usize, limit: u64 },

    #[error("invalid rate constants: {0}")]
    InvalidConstants(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
