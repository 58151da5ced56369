//! Estimator configuration shared by the pipeline stages.

use crate::error::CoreError;
use crate::field::{CropRect, ValidityThresholds};

/// Which per-pixel quantity the flow mean aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    /// Flow magnitude alone; disparity is ignored.
    OfOnly,
    /// Flow magnitude over disparity (the base estimator).
    OfOverDisp,
    /// Absolute horizontal flow over disparity.
    HorizOfOverDisp,
}

impl EstimatorMode {
    /// Short stable label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorMode::OfOnly => "of_only",
            EstimatorMode::OfOverDisp => "of_over_disp",
            EstimatorMode::HorizOfOverDisp => "horiz_of_over_disp",
        }
    }
}

/// Full configuration of the per-recording speed estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    /// Analysis rectangle; `None` means the full frame.
    pub crop: Option<CropRect>,
    pub thresholds: ValidityThresholds,
    /// Centered box-filter width for the speed trace; odd, >= 1.
    pub smoothing_window: usize,
    /// Box-filter each pixel's time series before aggregation.
    pub pixel_level_smoothing: bool,
    /// Apply the series-level smoother after pixel-level smoothing too.
    /// Ignored unless `pixel_level_smoothing` is set; off is useful for
    /// ablating the second pass.
    pub series_smoothing_after_pixel: bool,
    /// Fall back to the left/right horizontal-flow difference when both
    /// half-frame means share a sign (a turning event). Requires a full crop.
    pub turning_compensation: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            mode: EstimatorMode::OfOverDisp,
            crop: None,
            thresholds: ValidityThresholds::default(),
            smoothing_window: 25,
            pixel_level_smoothing: false,
            series_smoothing_after_pixel: true,
            turning_compensation: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(CoreError::InvalidConfig(format!(
                "smoothing window must be odd and >= 1, got {}",
                self.smoothing_window
            )));
        }
        if self.thresholds.of_min < 0.0 || self.thresholds.disp_min < 0.0 {
            return Err(CoreError::InvalidConfig(
                "thresholds must be non-negative".into(),
            ));
        }
        if self.turning_compensation && self.crop.is_some() {
            return Err(CoreError::InvalidConfig(
                "turning compensation needs the full frame (left/right halves of the wide image)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// The analysis rectangle for a concrete frame extent.
    pub fn crop_for(&self, width: usize, height: usize) -> CropRect {
        self.crop.unwrap_or_else(|| CropRect::full(width, height))
    }
}
