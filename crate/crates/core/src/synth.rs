//! Analytic pinhole ego-motion scene generator.
//!
//! Produces exact flow/disparity/ground-truth triples for verifying the
//! estimation pipeline. The flow model is first-order (instantaneous
//! motion): forward translation `Vz` over depth `Z` gives
//! `u = (x - cx) * Vz * dt / Z`, `v = (y - cy) * Vz * dt / Z`, and a yaw
//! rate adds `fx * w * dt` to `u` under the small-angle approximation.
//! Superposition and linearity hold exactly, which keeps oracle tolerances
//! tight; the pipeline itself never assumes any flow model.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::field::{CropRect, DisparityMap, FlowField, ScalarField};
use crate::ingest::{self, IngestError};

/// Minimum scene depth in meters; keeps flow bounded near the camera.
pub const DEPTH_FLOOR: f64 = 2.0;

/// Pinhole camera with a stereo baseline and a frame interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Stereo baseline in meters; sets the disparity scale `d = fx*B/Z`.
    pub baseline: f64,
    pub width: usize,
    pub height: usize,
    /// Frame interval in seconds.
    pub dt: f64,
}

impl Default for CameraModel {
    /// KITTI-like geometry: 1242x375 at 10 Hz with a ~0.54 m baseline.
    fn default() -> Self {
        Self {
            fx: 721.5377,
            fy: 721.5377,
            cx: 609.5593,
            cy: 172.854,
            baseline: 0.5372,
            width: 1242,
            height: 375,
            dt: 0.1,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), CoreError> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cx < self.width as f64
            && self.cy >= 0.0
            && self.cy < self.height as f64
            && self.baseline > 0.0
            && self.dt > 0.0
            && self.width >= 1
            && self.height >= 1;
        if ok {
            Ok(())
        } else {
            Err(CoreError::InvalidConfig(format!("bad camera model {self:?}")))
        }
    }

    /// Uniformly rescale resolution and intrinsics (baseline and frame
    /// interval are physical and stay put).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            fx: self.fx * s,
            fy: self.fy * s,
            cx: self.cx * s,
            cy: self.cy * s,
            baseline: self.baseline,
            width: ((self.width as f64 * s).round() as usize).max(1),
            height: ((self.height as f64 * s).round() as usize).max(1),
            dt: self.dt,
        }
    }
}

/// Per-frame ego motion: forward speed and yaw rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSample {
    /// Forward speed in m/s.
    pub vz: f64,
    /// Yaw rate in rad/s.
    pub yaw_rate: f64,
}

impl MotionSample {
    pub fn forward(vz: f64) -> Self {
        Self { vz, yaw_rate: 0.0 }
    }

    pub fn yaw(yaw_rate: f64) -> Self {
        Self {
            vz: 0.0,
            yaw_rate,
        }
    }
}

/// A static depth map plus a motion profile, one sample per frame.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    depth: ScalarField,
    motion: Vec<MotionSample>,
}

impl SyntheticScene {
    /// Scene from an explicit depth map; every sample must sit at or above
    /// [`DEPTH_FLOOR`].
    pub fn new(depth: ScalarField, motion: Vec<MotionSample>) -> Result<Self, CoreError> {
        if let Some(bad) = depth
            .data()
            .iter()
            .find(|z| !z.is_finite() || **z < DEPTH_FLOOR)
        {
            return Err(CoreError::InvalidConfig(format!(
                "scene depth {bad} below the {DEPTH_FLOOR} m floor"
            )));
        }
        if motion.is_empty() {
            return Err(CoreError::InvalidConfig("empty motion profile".into()));
        }
        Ok(Self { depth, motion })
    }

    /// Fronto-parallel plane at depth `z`.
    pub fn constant_depth(
        cam: &CameraModel,
        z: f64,
        motion: Vec<MotionSample>,
    ) -> Result<Self, CoreError> {
        let n = cam.width * cam.height;
        let depth = ScalarField::new(cam.width, cam.height, vec![z; n], vec![true; n])?;
        Self::new(depth, motion)
    }

    /// Vertical fronto-parallel depth bands, left to right.
    pub fn stepped_depth(
        cam: &CameraModel,
        steps: &[f64],
        motion: Vec<MotionSample>,
    ) -> Result<Self, CoreError> {
        if steps.is_empty() {
            return Err(CoreError::InvalidConfig("no depth steps".into()));
        }
        let mut data = Vec::with_capacity(cam.width * cam.height);
        for _y in 0..cam.height {
            for x in 0..cam.width {
                let band = x * steps.len() / cam.width;
                data.push(steps[band]);
            }
        }
        let n = data.len();
        let depth = ScalarField::new(cam.width, cam.height, data, vec![true; n])?;
        Self::new(depth, motion)
    }

    /// Seeded smooth random depth texture in `[z_min, z_max]`, built by
    /// bilinear interpolation of a coarse grid.
    pub fn random_smooth(
        cam: &CameraModel,
        seed: u64,
        z_min: f64,
        z_max: f64,
        motion: Vec<MotionSample>,
    ) -> Result<Self, CoreError> {
        if !(z_min >= DEPTH_FLOOR && z_max >= z_min) {
            return Err(CoreError::InvalidConfig(format!(
                "bad depth range [{z_min}, {z_max}]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells_x = 8usize;
        let cells_y = 4usize;
        let knots: Vec<f64> = (0..(cells_x + 1) * (cells_y + 1))
            .map(|_| rng.random_range(z_min..=z_max))
            .collect();
        let knot = |i: usize, j: usize| knots[j * (cells_x + 1) + i];

        let mut data = Vec::with_capacity(cam.width * cam.height);
        for y in 0..cam.height {
            let fy = if cam.height > 1 {
                y as f64 / (cam.height - 1) as f64 * cells_y as f64
            } else {
                0.0
            };
            let j = (fy.floor() as usize).min(cells_y - 1);
            let ty = fy - j as f64;
            for x in 0..cam.width {
                let fx = if cam.width > 1 {
                    x as f64 / (cam.width - 1) as f64 * cells_x as f64
                } else {
                    0.0
                };
                let i = (fx.floor() as usize).min(cells_x - 1);
                let tx = fx - i as f64;
                let z = knot(i, j) * (1.0 - tx) * (1.0 - ty)
                    + knot(i + 1, j) * tx * (1.0 - ty)
                    + knot(i, j + 1) * (1.0 - tx) * ty
                    + knot(i + 1, j + 1) * tx * ty;
                data.push(z.max(DEPTH_FLOOR));
            }
        }
        let n = data.len();
        let depth = ScalarField::new(cam.width, cam.height, data, vec![true; n])?;
        Self::new(depth, motion)
    }

    pub fn depth(&self) -> &ScalarField {
        &self.depth
    }

    pub fn motion(&self) -> &[MotionSample] {
        &self.motion
    }

    /// Frames in the recording this scene describes.
    pub fn frame_count(&self) -> usize {
        self.motion.len()
    }

    /// Ground-truth forward speed per frame.
    pub fn ground_truth(&self) -> Vec<f64> {
        self.motion.iter().map(|m| m.vz).collect()
    }
}

/// Flow between frames `t` and `t+1` under the first-order motion model.
/// All pixels are valid.
pub fn render_flow(scene: &SyntheticScene, cam: &CameraModel, t: usize) -> FlowField {
    let m = scene.motion[t];
    let (w, h) = (cam.width, cam.height);
    let yaw_u = cam.fx * m.yaw_rate * cam.dt;
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        let dy = y as f64 - cam.cy;
        for x in 0..w {
            let dx = x as f64 - cam.cx;
            let z = scene.depth.data()[y * w + x];
            let s = m.vz * cam.dt / z;
            u.push(dx * s + yaw_u);
            v.push(dy * s);
        }
    }
    FlowField::dense(w, h, u, v).expect("rendered flow is well-formed")
}

/// Disparity of the static scene: `d = fx * baseline / Z`. All pixels valid.
pub fn render_disparity(scene: &SyntheticScene, cam: &CameraModel) -> DisparityMap {
    let data = scene
        .depth
        .data()
        .iter()
        .map(|z| cam.fx * cam.baseline / z)
        .collect();
    DisparityMap::dense(cam.width, cam.height, data).expect("rendered disparity is well-formed")
}

/// Render the `frame_count - 1` flow/disparity pairs the estimator consumes.
pub fn render_frames(
    scene: &SyntheticScene,
    cam: &CameraModel,
) -> Vec<(FlowField, DisparityMap)> {
    let disp = render_disparity(scene, cam);
    (0..scene.frame_count().saturating_sub(1))
        .map(|t| (render_flow(scene, cam, t), disp.clone()))
        .collect()
}

/// Mean distance from the principal point over the crop's pixel grid.
pub fn mean_radius(cam: &CameraModel, crop: &CropRect) -> f64 {
    let mut sum = 0.0;
    for y in crop.y..crop.y + crop.h {
        let dy = y as f64 - cam.cy;
        for x in crop.x..crop.x + crop.w {
            let dx = x as f64 - cam.cx;
            sum += dx.hypot(dy);
        }
    }
    sum / (crop.w * crop.h) as f64
}

/// The exact image-domain-to-m/s factor for base-mode estimates on a
/// constant-depth scene whose crop pixels all pass the validity thresholds:
/// per frame, `raw = Vz * dt * mean_radius / (fx * baseline)`, so
/// `k = fx * baseline / (dt * mean_radius)` regardless of depth.
pub fn analytic_scale(cam: &CameraModel, crop: &CropRect) -> f64 {
    cam.fx * cam.baseline / (cam.dt * mean_radius(cam, crop))
}

/// A recording written to disk by [`generate_recording`].
#[derive(Debug, Clone)]
pub struct GeneratedRecording {
    pub id: String,
    pub ground_truth: Vec<f64>,
}

/// Write a scene as `<dir>/<id>/{flow,disp,oxts}` in the formats the ingest
/// module reads (.flo, PFM, oxts text).
pub fn generate_recording(
    scene: &SyntheticScene,
    cam: &CameraModel,
    id: &str,
    dir: &Path,
) -> Result<GeneratedRecording, IngestError> {
    let n = scene.frame_count();
    if n < 2 {
        return Err(CoreError::InvalidConfig(format!(
            "recording needs at least 2 frames, got {n}"
        ))
        .into());
    }
    let base = dir.join(id);
    let flow_dir = base.join("flow");
    let disp_dir = base.join("disp");
    let oxts_dir = base.join("oxts");
    for d in [&flow_dir, &disp_dir, &oxts_dir] {
        std::fs::create_dir_all(d).map_err(|e| ingest::io_err(d, e))?;
    }

    let disp = render_disparity(scene, cam);
    for t in 0..n {
        ingest::write_pfm(&disp, &disp_dir.join(format!("{t:06}.pfm")))?;
        let oxts_path = oxts_dir.join(format!("{t:06}.txt"));
        std::fs::write(&oxts_path, ingest::oxts_record(scene.motion[t].vz))
            .map_err(|e| ingest::io_err(&oxts_path, e))?;
    }
    for t in 0..n - 1 {
        let flow = render_flow(scene, cam, t);
        ingest::write_flo(&flow, &flow_dir.join(format!("{t:06}.flo")))?;
    }
    Ok(GeneratedRecording {
        id: id.to_string(),
        ground_truth: scene.ground_truth(),
    })
}

/// Canned scenarios for the CLI and the integration tests.
pub mod scenario {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Scenario {
        /// One recording at constant speed over a smooth random scene.
        Cruise,
        /// Accelerate, hold, brake.
        Ramp,
        /// Forward travel with a pure-yaw segment in the middle.
        Turn,
        /// Three constant-speed recordings over different scene depths.
        Suite,
    }

    impl Scenario {
        pub fn name(&self) -> &'static str {
            match self {
                Scenario::Cruise => "cruise",
                Scenario::Ramp => "ramp",
                Scenario::Turn => "turn",
                Scenario::Suite => "suite",
            }
        }

        pub fn all() -> [Scenario; 4] {
            [
                Scenario::Cruise,
                Scenario::Ramp,
                Scenario::Turn,
                Scenario::Suite,
            ]
        }
    }

    impl std::str::FromStr for Scenario {
        type Err = String;

        fn from_str(s: &str) -> Result<Self, Self::Err> {
            Scenario::all()
                .into_iter()
                .find(|sc| sc.name() == s)
                .ok_or_else(|| format!("unknown scenario {s:?}"))
        }
    }

    /// Piecewise forward-speed profile in thirds: ramp up, hold, ramp down.
    pub fn ramp_profile(n: usize, low: f64, high: f64) -> Vec<MotionSample> {
        let third = n / 3;
        (0..n)
            .map(|t| {
                let vz = if t < third {
                    low + (high - low) * t as f64 / third.max(1) as f64
                } else if t < 2 * third {
                    high
                } else {
                    let back = (t - 2 * third) as f64 / (n - 2 * third).max(1) as f64;
                    high - (high - low) * back
                };
                MotionSample::forward(vz)
            })
            .collect()
    }

    /// Forward travel with a pure-yaw middle segment. Returns the motion and
    /// the frame range `[start, end)` of the yaw segment.
    pub fn turn_profile(
        n: usize,
        vz: f64,
        yaw_rate: f64,
    ) -> (Vec<MotionSample>, std::ops::Range<usize>) {
        let third = n / 3;
        let segment = third..2 * third;
        let motion = (0..n)
            .map(|t| {
                if segment.contains(&t) {
                    MotionSample::yaw(yaw_rate)
                } else {
                    MotionSample::forward(vz)
                }
            })
            .collect();
        (motion, segment)
    }

    /// Build the scenario's scenes, one per recording id.
    pub fn build_scenes(
        scenario: Scenario,
        cam: &CameraModel,
        n_frames: usize,
        seed: u64,
    ) -> Result<Vec<(String, SyntheticScene)>, CoreError> {
        cam.validate()?;
        match scenario {
            Scenario::Cruise => {
                let motion = vec![MotionSample::forward(10.0); n_frames];
                let scene = SyntheticScene::random_smooth(cam, seed, 8.0, 30.0, motion)?;
                Ok(vec![("cruise_000".into(), scene)])
            }
            Scenario::Ramp => {
                let scene = SyntheticScene::random_smooth(
                    cam,
                    seed,
                    8.0,
                    30.0,
                    ramp_profile(n_frames, 5.0, 15.0),
                )?;
                Ok(vec![("ramp_000".into(), scene)])
            }
            Scenario::Turn => {
                let (motion, _) = turn_profile(n_frames, 10.0, 0.1);
                let scene = SyntheticScene::random_smooth(cam, seed, 8.0, 30.0, motion)?;
                Ok(vec![("turn_000".into(), scene)])
            }
            Scenario::Suite => {
                // depths deliberately not proportional to speeds, so
                // flow-only estimates cannot share one scale factor
                let spec = [(5.0, 40.0), (10.0, 20.0), (20.0, 10.0)];
                spec.iter()
                    .enumerate()
                    .map(|(i, &(vz, z))| {
                        let motion = vec![MotionSample::forward(vz); n_frames];
                        let scene = SyntheticScene::constant_depth(cam, z, motion)?;
                        Ok((format!("suite_{i:03}"), scene))
                    })
                    .collect()
            }
        }
    }

    /// Generate the scenario on disk and write its manifest. Returns the
    /// manifest path.
    pub fn generate(
        scenario: Scenario,
        cam: &CameraModel,
        n_frames: usize,
        seed: u64,
        out_dir: &Path,
    ) -> Result<PathBuf, IngestError> {
        let scenes = build_scenes(scenario, cam, n_frames, seed)?;
        let mut ids = Vec::with_capacity(scenes.len());
        for (id, scene) in &scenes {
            generate_recording(scene, cam, id, out_dir)?;
            ids.push(id.clone());
        }
        let manifest = ingest::render_manifest(
            &ids,
            crate::recording::FlowFormat::Flo,
            crate::recording::DispFormat::Pfm,
            true,
        );
        let manifest_path = out_dir.join("dataset.manifest");
        std::fs::write(&manifest_path, manifest)
            .map_err(|e| ingest::io_err(&manifest_path, e))?;
        Ok(manifest_path)
    }
}
