pub mod chart;
pub mod estimate;
pub mod evaluate;
pub mod metrics;
pub mod synth;

use egospeed_core::calibrate::FitMethod;
use egospeed_core::{
    CropRect, EstimatorConfig, EstimatorMode, ValidityThresholds, CROP_B, CROP_G, CROP_R,
};

use crate::error::CliError;
use crate::{EstimatorArgs, FitArg, ModeArg};

/// Resolve a crop name or `X:Y:W:H` rectangle; `full` means no crop.
pub fn parse_crop(spec: &str) -> Result<Option<CropRect>, CliError> {
    match spec {
        "full" => Ok(None),
        "cropB" => Ok(Some(CROP_B)),
        "cropG" => Ok(Some(CROP_G)),
        "cropR" => Ok(Some(CROP_R)),
        other => {
            let parts: Vec<&str> = other.split(':').collect();
            if parts.len() != 4 {
                return Err(CliError::config(format!(
                    "crop must be full, cropB, cropG, cropR, or X:Y:W:H; got {other:?}"
                )));
            }
            let mut vals = [0usize; 4];
            for (slot, part) in vals.iter_mut().zip(&parts) {
                *slot = part.trim().parse().map_err(|_| {
                    CliError::config(format!("bad crop component {part:?} in {other:?}"))
                })?;
            }
            let rect = CropRect::new(vals[0], vals[1], vals[2], vals[3])
                .map_err(|e| CliError::config(e.to_string()))?;
            Ok(Some(rect))
        }
    }
}

impl ModeArg {
    pub fn to_mode(self) -> EstimatorMode {
        match self {
            ModeArg::Base => EstimatorMode::OfOverDisp,
            ModeArg::OfOnly => EstimatorMode::OfOnly,
            ModeArg::Horiz => EstimatorMode::HorizOfOverDisp,
        }
    }
}

impl FitArg {
    pub fn to_method(self) -> FitMethod {
        match self {
            FitArg::Lsq => FitMethod::LeastSquares,
            FitArg::Median => FitMethod::MedianRatio,
        }
    }
}

/// Build and validate an estimator configuration from the shared CLI flags.
pub fn build_config(args: &EstimatorArgs) -> Result<EstimatorConfig, CliError> {
    let cfg = EstimatorConfig {
        mode: args.mode.to_mode(),
        crop: parse_crop(&args.crop)?,
        thresholds: ValidityThresholds {
            of_min: args.of_min,
            disp_min: args.disp_min,
        },
        smoothing_window: args.window,
        pixel_level_smoothing: args.pixel_smooth,
        series_smoothing_after_pixel: !args.no_resmooth,
        turning_compensation: args.tc,
    };
    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
    Ok(cfg)
}
