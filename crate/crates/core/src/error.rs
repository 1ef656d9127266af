use std::path::PathBuf;

/// Errors produced by the core library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes or lengths that do not line up (parameter counts, state sizes, population sizes).
    #[error("structural error: {0}")]
    Structural(String),

    /// An argument outside its documented domain.
    #[error("input error: {0}")]
    Input(String),

    /// An operation invoked in a state where its precondition does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite fitness {value} for individual {index} in generation {generation}")]
    NonFiniteFitness {
        generation: usize,
        index: usize,
        value: f64,
    },

    /// Invalid experiment configuration; `field` is the dotted config path.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("failed to parse config: {0}")]
    ConfigSyntax(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
