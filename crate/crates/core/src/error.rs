//! Crate-wide error type.

/// Errors produced by the sampling stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("step t={t} outside schedule range 1..={total}")]
    StepOutOfRange { t: usize, total: usize },
    #[error("stochastic noise must be all zeros at t = 1")]
    NoiseAtFinalStep,
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("codec: {0}")]
    Codec(String),
    #[error("mask: {0}")]
    Mask(String),
    #[error("rectangle out of bounds: {0}")]
    RectOutOfBounds(String),
    #[error("detector kind 'none' cannot produce a mask")]
    DetectorNone,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("non-finite value in grid data")]
    NonFinite,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("image file: {0}")]
    ImageFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
