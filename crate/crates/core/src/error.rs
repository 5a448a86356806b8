use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not a frame: {0}")]
    NotAFrame(String),
    #[error("dense materialization of {rows}x{cols} exceeds the cap of {cap} entries")]
    MaterializationCap { rows: usize, cols: usize, cap: usize },
    #[error("enumeration of {count} supports exceeds the cap of {cap}; use the Monte-Carlo estimate instead")]
    EnumerationCap { count: u128, cap: u128 },
    #[error("zero column {0} has no direction")]
    ZeroColumn(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
