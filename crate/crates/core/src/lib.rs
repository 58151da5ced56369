//! Ego-vehicle speed estimation from dense optical flow and monocular disparity.
//!
//! The library turns per-frame flow/disparity maps into a speed trace in four
//! stages: per-frame aggregation of flow magnitude over disparity inside an
//! analysis crop ([`pipeline::frame_speed`]), temporal box smoothing
//! ([`pipeline::smooth_series`]), an optional fallback estimator for turning
//! events ([`pipeline::frame_speed_tc`]), and a single global scale factor
//! fitted against ground truth ([`calibrate::fit_scale`]).
//!
//! Supporting modules: [`ingest`] parses the on-disk formats (.flo, KITTI
//! flow PNG, PFM, 16-bit depth PNG, raw float maps, oxts ground truth) and
//! resolves dataset manifests; [`metrics`] scores flow and depth predictions;
//! [`synth`] renders analytic pinhole ego-motion scenes that serve as the
//! verification oracle for everything else.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod field;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod recording;
pub mod series;
pub mod synth;

pub use config::{EstimatorConfig, EstimatorMode};
pub use error::CoreError;
pub use field::{
    apply_crop, flow_magnitude, CropRect, DisparityMap, FlowField, ScalarField,
    ValidityThresholds, CROP_B, CROP_G, CROP_R, KITTI_FRAME_HEIGHT, KITTI_FRAME_WIDTH,
};
pub use recording::{DispFormat, FlowFormat, GroundTruthField, Recording};
pub use series::SpeedSeries;
