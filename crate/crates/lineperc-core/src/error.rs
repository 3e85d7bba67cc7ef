use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("site or rectangle outside the sampled window: {0}")]
    Range(String),
    #[error("volume {volume} exceeds the limit of {limit} sites")]
    Capacity { volume: u128, limit: u128 },
    #[error("degenerate input: {0}")]
    Domain(String),
    #[error("incompatible paths: {0}")]
    Incompatible(String),
    #[error("{0}")]
    Path(String),
    #[error("no such crossing")]
    NoCrossing,
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    Merge(String),
}
