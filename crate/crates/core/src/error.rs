use thiserror::Error;

/// Failure kinds shared by every module. The CLI maps these onto exit codes:
/// `Input`, `Config` and `Unsupported` are caller mistakes, `Numeric` and
/// `Resource` are failures of the computation itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported mode: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// True for errors caused by the caller's request rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Config(_) | Error::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
