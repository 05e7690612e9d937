use std::io;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state off the admissible simplex: {0}")]
    OffSimplex(String),

    #[error("step size underflow at t = {t} (h = {h:e}), state = {state:?}")]
    StepSizeUnderflow { t: f64, h: f64, state: [f64; 3] },

    #[error("truncated trace: expected {expected} steps, found {found}")]
    TruncatedTrace { expected: usize, found: usize },

    #[error("malformed policy blob: {0}")]
    Blob(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
