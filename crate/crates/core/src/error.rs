use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("paths are sampled on different grids")]
    GridMismatch,
    #[error("time {0} is not a grid point")]
    OffGrid(f64),
    #[error("interval [{0}, {1}] is empty or outside the grid")]
    BadInterval(f64, f64),
    #[error("estimation failed: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
