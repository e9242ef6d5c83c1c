use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("invalid configuration at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Numeric(#[from] wres_core::Error),
}
