use std::path::PathBuf;

use crate::optimizer::Candidate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}: line {line}, column `{column}`: {message}")]
    Load {
        path: PathBuf,
        line: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("logic error: {0}")]
    Logic(String),

    #[error("enumeration grid has {size} points, above the cap of {cap}")]
    GridTooLarge { size: usize, cap: usize },

    #[error("evaluation of candidate (n_pv={}, n_ht={}) failed: {source}", candidate.n_pv, candidate.n_ht)]
    Evaluation {
        candidate: Candidate,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for errors caused by bad user input (files, config, arguments)
    /// rather than a failure while running a study.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::Load { .. }
                | Error::Format { .. }
                | Error::Config(_)
                | Error::GridTooLarge { .. }
                | Error::Io { .. }
                | Error::Csv { .. }
        )
    }
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("{name} must be finite, got {value}")))
    }
}
