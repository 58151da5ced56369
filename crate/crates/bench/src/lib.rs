//! Shared fixtures for the benchmarks.

use egospeed_core::synth::{CameraModel, MotionSample, SyntheticScene};
use egospeed_core::{DisparityMap, FlowField};

/// Full-resolution KITTI-like frame pair over a smooth random scene.
pub fn kitti_frame_pair() -> (FlowField, DisparityMap) {
    let cam = CameraModel::default();
    let scene = SyntheticScene::random_smooth(
        &cam,
        7,
        8.0,
        40.0,
        vec![MotionSample::forward(10.0); 2],
    )
    .expect("valid scene");
    (
        egospeed_core::synth::render_flow(&scene, &cam, 0),
        egospeed_core::synth::render_disparity(&scene, &cam),
    )
}
