use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto the CLI exit codes: `Domain` and `Config` are caller
/// mistakes (exit 2), `Numerical` is a solver that could not reach its
/// tolerance (exit 3), `Io` is a filesystem problem (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates an invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical method failed to converge. Carries the best estimate
    /// reached and the error bound attached to it.
    #[error("numerical failure in {context}: best estimate {estimate:e}, error bound {error_bound:e}")]
    Numerical {
        context: String,
        estimate: f64,
        error_bound: f64,
    },

    /// A grid-valued operation failed at one point; `index` locates it.
    #[error("failure at grid index {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Filesystem error with the offending path attached.
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
