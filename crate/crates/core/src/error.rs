use crate::field::CropRect;

/// Errors raised while constructing or combining the core field types.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("field of {width}x{height} needs {expected} entries, got {got}")]
    BadLength {
        width: usize,
        height: usize,
        expected: usize,
        got: usize,
    },
    #[error("field must be at least 1x1, got {width}x{height}")]
    EmptyExtent { width: usize, height: usize },
    #[error("crop {crop} exceeds field extent {width}x{height}")]
    CropOutOfBounds {
        crop: CropRect,
        width: usize,
        height: usize,
    },
    #[error("extent mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    ExtentMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("invalid estimator config: {0}")]
    InvalidConfig(String),
    #[error("speed series value at index {index} is {value}, expected finite and >= 0")]
    InvalidSeriesValue { index: usize, value: f64 },
    #[error(
        "recording {id}: flow/disparity/ground-truth counts {flows}/{disps}/{gts} are inconsistent"
    )]
    InconsistentCounts {
        id: String,
        flows: usize,
        disps: usize,
        gts: String,
    },
}
