use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported in exact mode: {0}")]
    UnsupportedMode(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
