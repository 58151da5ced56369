//! A recording: ordered frame sequence with on-disk map references.

use std::path::PathBuf;

use crate::error::CoreError;

/// On-disk encoding of flow maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowFormat {
    /// Middlebury `.flo` binary.
    Flo,
    /// KITTI 2015 16-bit RGB flow PNG.
    KittiPng,
}

impl FlowFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            FlowFormat::Flo => "flo",
            FlowFormat::KittiPng => "png",
        }
    }
}

/// On-disk encoding of disparity/depth maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispFormat {
    /// Portable float map, grayscale `Pf`.
    Pfm,
    /// 16-bit single-channel PNG, value/256 convention, 0 = invalid.
    Png16,
    /// Raw little-endian floats behind a `width,height` u32 header.
    FloatRaw,
}

impl DispFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            DispFormat::Pfm => "pfm",
            DispFormat::Png16 => "png",
            DispFormat::FloatRaw => "raw",
        }
    }
}

/// Which oxts channel serves as ground-truth speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroundTruthField {
    /// Forward velocity `vf` (field 8), the direct measurement.
    #[default]
    Forward,
    /// `sqrt(vn^2 + ve^2)`, the horizontal speed norm.
    HorizontalNorm,
}

/// An ordered frame sequence with per-frame map paths and optional
/// ground-truth forward speeds in m/s.
///
/// Flow maps live between consecutive frames, so there are
/// `frame_count - 1` of them; disparity and ground truth are per frame.
#[derive(Debug, Clone)]
pub struct Recording {
    pub id: String,
    pub frame_count: usize,
    pub flow_paths: Vec<PathBuf>,
    pub disp_paths: Vec<PathBuf>,
    pub ground_truth: Option<Vec<f64>>,
    pub flow_format: FlowFormat,
    pub disp_format: DispFormat,
    /// Multiplier applied to decoded disparity samples.
    pub disp_scale: f64,
}

impl Recording {
    pub fn new(
        id: impl Into<String>,
        flow_paths: Vec<PathBuf>,
        disp_paths: Vec<PathBuf>,
        ground_truth: Option<Vec<f64>>,
        flow_format: FlowFormat,
        disp_format: DispFormat,
        disp_scale: f64,
    ) -> Result<Self, CoreError> {
        let id = id.into();
        let frame_count = disp_paths.len();
        let gts = ground_truth
            .as_ref()
            .map_or_else(|| "-".to_string(), |g| g.len().to_string());
        if frame_count == 0
            || flow_paths.len() + 1 != frame_count
            || ground_truth
                .as_ref()
                .is_some_and(|g| g.len() != frame_count)
        {
            return Err(CoreError::InconsistentCounts {
                id,
                flows: flow_paths.len(),
                disps: frame_count,
                gts,
            });
        }
        Ok(Self {
            id,
            frame_count,
            flow_paths,
            disp_paths,
            ground_truth,
            flow_format,
            disp_format,
            disp_scale,
        })
    }

    /// Number of per-frame estimates the pipeline will emit.
    pub fn estimate_count(&self) -> usize {
        self.frame_count - 1
    }
}
