use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exact enumeration or sampler would exceed a hard size guard.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn guard(what: &str, size: f64, limit: f64) -> Result<()> {
    if size > limit {
        Err(Error::ResourceLimit(format!(
            "{what}: {size:.3e} exceeds the guard {limit:.0e}"
        )))
    } else {
        Ok(())
    }
}
