use alloc::string::String;
use core::fmt;

/// Errors raised by the retrieval core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A document has no tokens left after filtering.
    EmptyDocument,
    /// A corpus has no indexable statements.
    EmptyCorpus,
    /// A query has no usable tokens for the chosen backend.
    EmptyQuery,
    /// A token has no vector and none can be synthesized.
    UnresolvableToken(String),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    InvalidArgument(String),
    /// Iterative SVD did not reach the requested residual.
    NoConvergence {
        iterations: usize,
        residual: f64,
    },
    /// The exact transport solver failed.
    SolverFailure(String),
    EmptyVocabulary,
    MissingResource(String),
    /// A trial target matches no corpus statement.
    UnresolvedTarget {
        trial: String,
    },
    EmptyTrial {
        trial: String,
    },
    /// Rate computation over zero queries.
    NoQueries,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyDocument => f.write_str("document is empty after filtering"),
            Error::EmptyCorpus => f.write_str("corpus has no non-empty statements"),
            Error::EmptyQuery => f.write_str("query has no usable tokens"),
            Error::UnresolvableToken(t) => write!(f, "no vector for token {t:?}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "svd did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::SolverFailure(msg) => write!(f, "transport solver failed: {msg}"),
            Error::EmptyVocabulary => f.write_str("vocabulary is empty"),
            Error::MissingResource(what) => write!(f, "missing resource: {what}"),
            Error::UnresolvedTarget { trial } => {
                write!(f, "trial {trial}: target matches no statement")
            }
            Error::EmptyTrial { trial } => write!(f, "trial {trial} has no queries"),
            Error::NoQueries => f.write_str("no queries to score"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
