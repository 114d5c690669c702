use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("point is singular: {0}")]
    Singular(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("chart unavailable: {0}")]
    Chart(String),

    #[error("not differentiable: {0}")]
    NotDifferentiable(String),

    #[error("instance too large: {0}")]
    Size(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
