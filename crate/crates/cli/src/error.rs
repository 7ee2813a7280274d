use thiserror::Error;

/// Problems with the run configuration. All map to exit status 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid scenario field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("invalid option: {0}")]
    Option(String),
}
