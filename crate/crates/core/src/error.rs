use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is invalid. `key` names the
    /// offending field (dotted path for nested config entries).
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// The requested operation is not available for this model or law.
    #[error("unsupported capability: {0}")]
    Capability(String),

    /// An input violated a documented precondition at runtime.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn capability(message: impl Into<String>) -> Self {
        Error::Capability(message.into())
    }

    /// Prefix the key of a configuration error with `parent.`.
    pub fn within(self, parent: &str) -> Self {
        match self {
            Error::Config { key, message } => Error::Config {
                key: format!("{parent}.{key}"),
                message,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
