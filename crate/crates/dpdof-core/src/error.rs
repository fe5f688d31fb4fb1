use alloc::string::String;

/// Errors reported by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height}x{channels}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        channels: usize,
    },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("expected {expected} channel(s), found {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("disparity {value} outside the matcher range [-{limit}, {limit}]")]
    DisparityOutOfRange { value: f64, limit: f64 },
    #[error("disparity {disparity} implies a non-positive or infinite depth; valid range is ({min}, {max})")]
    DisparityOutOfDomain { disparity: f64, min: f64, max: f64 },
    #[error("depth {depth} m must exceed the focal length {focal_length} m")]
    DepthTooSmall { depth: f64, focal_length: f64 },
    #[error("focus distance {focus_distance} m has {found} distinct target depth(s); at least 2 are required")]
    InsufficientDepths { focus_distance: f64, found: usize },
    #[error("periods {0} and {1} are not relatively prime")]
    NonCoprimePeriods(usize, usize),
    #[error("noise patch size {size} incompatible with period {period} and feather width {feather}")]
    PatchSize {
        size: usize,
        period: usize,
        feather: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
