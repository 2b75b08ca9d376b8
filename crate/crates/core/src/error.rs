use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the core library.
///
/// Variants fall into three families that the CLI maps onto distinct exit
/// codes: malformed input data ([`Error::Parse`], [`Error::Schema`],
/// [`Error::Io`]), caller misconfiguration ([`Error::Config`]) and numeric or
/// state problems hit while computing ([`Error::Domain`],
/// [`Error::InsufficientData`], [`Error::MissingResidualCache`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        /// 1-based data row index (the header is row 0).
        row: usize,
        column: String,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {what} needs at least {required} cases, dataset has {available}")]
    InsufficientData {
        what: &'static str,
        required: usize,
        available: usize,
    },

    #[error("no residual cache on this model; run residual fitting (`fit`) before asking for residual conviction")]
    MissingResidualCache,
}

impl Error {
    /// True for errors caused by the input files rather than by flags or
    /// by the computation.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Parse { .. } | Error::Schema(_))
    }

    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
