//! Per-frame speed aggregation and temporal smoothing.
//!
//! A frame's speed is the mean flow magnitude over threshold-valid pixels in
//! the analysis crop, divided by the mean disparity over its own
//! threshold-valid pixels. The two supports are thresholded independently.
//! Per-recording traces are box-filtered in time; a turning-event fallback
//! replaces the magnitude mean when the left and right half-frame horizontal
//! flows share a sign.

use rayon::prelude::*;

use crate::config::{EstimatorConfig, EstimatorMode};
use crate::error::CoreError;
use crate::field::{apply_crop, DisparityMap, FlowField, ScalarField};
use crate::ingest::{self, IngestError};
use crate::recording::Recording;
use crate::series::SpeedSeries;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("flow extent {flow_width}x{flow_height} vs disparity {disp_width}x{disp_height}")]
    ExtentMismatch {
        flow_width: usize,
        flow_height: usize,
        disp_width: usize,
        disp_height: usize,
    },
    #[error("turning compensation requires the full frame")]
    TcRequiresFullFrame,
    #[error("cannot smooth an empty series")]
    EmptySeries,
    #[error("cannot process an empty frame sequence")]
    EmptySequence,
    #[error("smoothing window must be odd and >= 1, got {0}")]
    InvalidWindow(usize),
}

/// One frame's aggregate before scaling.
///
/// `raw_value` is `None` when either mean had an empty support (no valid
/// pixels); a missing frame is data, not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameEstimate {
    pub frame_index: usize,
    pub raw_value: Option<f64>,
    /// Flow-valid pixels inside the crop.
    pub valid_pixel_count: usize,
    /// Whether the turning-event fallback produced this value.
    pub tc_triggered: bool,
}

/// Everything the estimator needs from one frame, already cropped:
/// the mode's flow channel (magnitude or |u|), the signed horizontal
/// channel when turning compensation may run, and disparity.
struct FrameChannels {
    of: ScalarField,
    u: Option<ScalarField>,
    disp: ScalarField,
}

struct ChannelsRef<'a> {
    of: &'a ScalarField,
    u: Option<&'a ScalarField>,
    disp: &'a ScalarField,
}

impl FrameChannels {
    fn as_ref(&self) -> ChannelsRef<'_> {
        ChannelsRef {
            of: &self.of,
            u: self.u.as_ref(),
            disp: &self.disp,
        }
    }
}

fn prep_channels(
    f: &FlowField,
    d: &DisparityMap,
    cfg: &EstimatorConfig,
    with_u: bool,
) -> Result<FrameChannels, PipelineError> {
    if f.width() != d.width() || f.height() != d.height() {
        return Err(PipelineError::ExtentMismatch {
            flow_width: f.width(),
            flow_height: f.height(),
            disp_width: d.width(),
            disp_height: d.height(),
        });
    }
    let crop = cfg.crop_for(f.width(), f.height());
    let of_full = match cfg.mode {
        EstimatorMode::HorizOfOverDisp => f.horizontal_field().map(f64::abs),
        _ => f.magnitude_field(),
    };
    let of = apply_crop(&of_full, &crop)?;
    let disp = apply_crop(d.as_scalar(), &crop)?;
    // turning compensation is full-frame only, so no crop on the signed channel
    let u = with_u.then(|| f.horizontal_field());
    Ok(FrameChannels { of, u, disp })
}

/// Mean of `field` over mask-valid samples strictly above `min`, with the
/// contributing count.
fn thresholded_mean(field: &ScalarField, min: f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, &v) in field.data().iter().enumerate() {
        if field.valid()[i] && v > min {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        (0.0, 0)
    } else {
        (sum / count as f64, count)
    }
}

fn base_estimate(ch: &ChannelsRef<'_>, cfg: &EstimatorConfig, frame_index: usize) -> FrameEstimate {
    let (of_mean, of_count) = thresholded_mean(ch.of, cfg.thresholds.of_min);
    let raw_value = match cfg.mode {
        EstimatorMode::OfOnly => (of_count > 0).then_some(of_mean),
        EstimatorMode::OfOverDisp | EstimatorMode::HorizOfOverDisp => {
            let (disp_mean, disp_count) = thresholded_mean(ch.disp, cfg.thresholds.disp_min);
            (of_count > 0 && disp_count > 0).then(|| of_mean / disp_mean)
        }
    };
    FrameEstimate {
        frame_index,
        raw_value,
        valid_pixel_count: of_count,
        tc_triggered: false,
    }
}

fn tc_estimate(ch: &ChannelsRef<'_>, cfg: &EstimatorConfig, frame_index: usize) -> FrameEstimate {
    let u = ch.u.expect("turning compensation needs the signed horizontal channel");
    let (width, height) = (u.width(), u.height());
    // middle column of odd widths goes to the right half
    let half = width / 2;
    let mut left_sum = 0.0;
    let mut left_n = 0usize;
    let mut right_sum = 0.0;
    let mut right_n = 0usize;
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !(ch.of.valid()[i] && ch.of.data()[i] > cfg.thresholds.of_min) {
                continue;
            }
            if x < half {
                left_sum += u.data()[i];
                left_n += 1;
            } else {
                right_sum += u.data()[i];
                right_n += 1;
            }
        }
    }
    if left_n > 0 && right_n > 0 {
        let mean_left = left_sum / left_n as f64;
        let mean_right = right_sum / right_n as f64;
        // strict same-sign test; a zero mean falls through to the base path
        if mean_left * mean_right > 0.0 {
            let (disp_mean, disp_count) = thresholded_mean(ch.disp, cfg.thresholds.disp_min);
            let raw_value =
                (disp_count > 0).then(|| (mean_left - mean_right).abs() / disp_mean);
            return FrameEstimate {
                frame_index,
                raw_value,
                valid_pixel_count: left_n + right_n,
                tc_triggered: true,
            };
        }
    }
    base_estimate(ch, cfg, frame_index)
}

fn estimate_one(ch: ChannelsRef<'_>, cfg: &EstimatorConfig, frame_index: usize) -> FrameEstimate {
    if cfg.turning_compensation && ch.u.is_some() {
        tc_estimate(&ch, cfg, frame_index)
    } else {
        base_estimate(&ch, cfg, frame_index)
    }
}

/// Aggregate one frame pair into a speed value (no turning compensation).
pub fn frame_speed(
    f: &FlowField,
    d: &DisparityMap,
    cfg: &EstimatorConfig,
) -> Result<FrameEstimate, PipelineError> {
    let ch = prep_channels(f, d, cfg, false)?;
    Ok(base_estimate(&ch.as_ref(), cfg, 0))
}

/// Aggregate one full-frame pair, falling back to the left/right horizontal
/// flow difference over the frame disparity mean when both half means share
/// a sign (a turning event).
pub fn frame_speed_tc(
    f: &FlowField,
    d: &DisparityMap,
    cfg: &EstimatorConfig,
) -> Result<FrameEstimate, PipelineError> {
    if cfg.crop.is_some() {
        return Err(PipelineError::TcRequiresFullFrame);
    }
    let ch = prep_channels(f, d, cfg, true)?;
    Ok(tc_estimate(&ch.as_ref(), cfg, 0))
}

/// Centered equal-weight moving average.
///
/// At the series boundaries the window shrinks to the available indices and
/// renormalizes by the actual count. Missing entries stay missing and never
/// enter a neighbor's window or divisor.
pub fn smooth_series(s: &SpeedSeries, window: usize) -> Result<SpeedSeries, PipelineError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(PipelineError::InvalidWindow(window));
    }
    if s.is_empty() {
        return Err(PipelineError::EmptySeries);
    }
    let half = window / 2;
    let values = s.values();
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if values[i].is_none() {
            out.push(None);
            continue;
        }
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let mut sum = 0.0;
        let mut count = 0usize;
        for v in values[lo..=hi].iter().flatten() {
            sum += v;
            count += 1;
        }
        out.push(Some(sum / count as f64));
    }
    Ok(s.with_values(out)?)
}

/// Box-filter each pixel's time series across a frame sequence.
///
/// A pixel is valid at time `t` after smoothing iff it was valid at `t`
/// before; the filter averages only the valid samples inside the (shrunk,
/// renormalized) window, exactly like [`smooth_series`] per pixel.
pub fn smooth_fields_pixelwise(
    frames: &[ScalarField],
    window: usize,
) -> Result<Vec<ScalarField>, PipelineError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(PipelineError::InvalidWindow(window));
    }
    let Some(first) = frames.first() else {
        return Err(PipelineError::EmptySequence);
    };
    let (width, height) = (first.width(), first.height());
    for f in frames {
        if f.width() != width || f.height() != height {
            return Err(CoreError::ExtentMismatch {
                left_width: width,
                left_height: height,
                right_width: f.width(),
                right_height: f.height(),
            }
            .into());
        }
    }
    let half = window / 2;
    let n_frames = frames.len();
    let n_px = width * height;
    let smoothed: Vec<ScalarField> = (0..n_frames)
        .into_par_iter()
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n_frames - 1);
            let mut data = Vec::with_capacity(n_px);
            for i in 0..n_px {
                if !frames[t].valid()[i] {
                    data.push(frames[t].data()[i]);
                    continue;
                }
                let mut sum = 0.0;
                let mut count = 0usize;
                for frame in &frames[lo..=hi] {
                    if frame.valid()[i] {
                        sum += frame.data()[i];
                        count += 1;
                    }
                }
                data.push(sum / count as f64);
            }
            ScalarField::new(width, height, data, frames[t].valid().to_vec())
                .expect("extent preserved")
        })
        .collect();
    Ok(smoothed)
}

/// Per-recording estimate: the per-frame aggregates plus the raw and
/// smoothed pre-scale traces.
#[derive(Debug, Clone)]
pub struct RecordingEstimate {
    pub recording_id: String,
    pub frames: Vec<FrameEstimate>,
    pub raw: SpeedSeries,
    pub smoothed: SpeedSeries,
}

impl RecordingEstimate {
    /// The pre-scale series the calibration stage consumes.
    pub fn series(&self) -> &SpeedSeries {
        &self.smoothed
    }
}

fn finish_channels(
    channels: Vec<FrameChannels>,
    cfg: &EstimatorConfig,
    recording_id: &str,
) -> Result<RecordingEstimate, PipelineError> {
    let n = channels.len();
    let mut ofs = Vec::with_capacity(n);
    let mut us = Vec::new();
    let mut disps = Vec::with_capacity(n);
    for c in channels {
        ofs.push(c.of);
        if let Some(u) = c.u {
            us.push(u);
        }
        disps.push(c.disp);
    }
    let with_u = !us.is_empty();
    if cfg.pixel_level_smoothing {
        ofs = smooth_fields_pixelwise(&ofs, cfg.smoothing_window)?;
        disps = smooth_fields_pixelwise(&disps, cfg.smoothing_window)?;
        if with_u {
            us = smooth_fields_pixelwise(&us, cfg.smoothing_window)?;
        }
    }
    let estimates: Vec<FrameEstimate> = (0..n)
        .into_par_iter()
        .map(|t| {
            let ch = ChannelsRef {
                of: &ofs[t],
                u: with_u.then(|| &us[t]),
                disp: &disps[t],
            };
            estimate_one(ch, cfg, t)
        })
        .collect();
    assemble(estimates, cfg, recording_id)
}

fn assemble(
    estimates: Vec<FrameEstimate>,
    cfg: &EstimatorConfig,
    recording_id: &str,
) -> Result<RecordingEstimate, PipelineError> {
    let raw = SpeedSeries::new(
        recording_id,
        0,
        estimates.iter().map(|e| e.raw_value).collect(),
    )?;
    let smoothed = if cfg.pixel_level_smoothing && !cfg.series_smoothing_after_pixel {
        raw.clone()
    } else {
        smooth_series(&raw, cfg.smoothing_window)?
    };
    Ok(RecordingEstimate {
        recording_id: recording_id.to_string(),
        frames: estimates,
        raw,
        smoothed,
    })
}

/// Estimate a recording already resident in memory. Frame pair `t` holds the
/// flow from frame `t` to `t+1` and the disparity of frame `t`; the estimate
/// lands at index `t`.
pub fn estimate_frames(
    frames: &[(FlowField, DisparityMap)],
    cfg: &EstimatorConfig,
    recording_id: &str,
) -> Result<RecordingEstimate, PipelineError> {
    cfg.validate()?;
    if frames.is_empty() {
        return Err(PipelineError::EmptySequence);
    }
    let with_u = cfg.turning_compensation;
    let channels: Vec<FrameChannels> = frames
        .par_iter()
        .map(|(f, d)| prep_channels(f, d, cfg, with_u))
        .collect::<Result<_, _>>()?;
    finish_channels(channels, cfg, recording_id)
}

fn load_pair(
    rec: &Recording,
    t: usize,
) -> Result<(FlowField, DisparityMap), PipelineError> {
    let f = ingest::read_flow(&rec.flow_paths[t], rec.flow_format)?;
    let d = ingest::read_disparity(&rec.disp_paths[t], rec.disp_format, rec.disp_scale)?;
    Ok((f, d))
}

/// Estimate a recording from disk. Frames load in parallel; results are
/// identical regardless of evaluation order.
pub fn estimate_recording(
    rec: &Recording,
    cfg: &EstimatorConfig,
) -> Result<RecordingEstimate, PipelineError> {
    cfg.validate()?;
    let n = rec.estimate_count();
    if n == 0 {
        return Err(PipelineError::EmptySequence);
    }
    let with_u = cfg.turning_compensation;
    if cfg.pixel_level_smoothing {
        let channels: Vec<FrameChannels> = (0..n)
            .into_par_iter()
            .map(|t| {
                let (f, d) = load_pair(rec, t)?;
                prep_channels(&f, &d, cfg, with_u)
            })
            .collect::<Result<_, _>>()?;
        finish_channels(channels, cfg, &rec.id)
    } else {
        // no temporal coupling before the series stage, so frames stream
        let estimates: Vec<FrameEstimate> = (0..n)
            .into_par_iter()
            .map(|t| {
                let (f, d) = load_pair(rec, t)?;
                let ch = prep_channels(&f, &d, cfg, with_u)?;
                Ok(estimate_one(ch.as_ref(), cfg, t))
            })
            .collect::<Result<_, PipelineError>>()?;
        assemble(estimates, cfg, &rec.id)
    }
}
