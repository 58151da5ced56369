//! Global scale-factor fitting and RMSE evaluation.
//!
//! One scalar `k` converts the whole pre-scale speed domain to m/s. The
//! default fit minimizes `sum (gt - k * pred)^2`, which has the closed form
//! `k = sum(pred * gt) / sum(pred^2)`; a median-of-ratios alternative is
//! available for comparison. Fitting pools every recording, matching a
//! single global conversion rather than per-recording tuning.

use rayon::prelude::*;

use crate::config::EstimatorConfig;
use crate::pipeline::{estimate_recording, PipelineError, RecordingEstimate};
use crate::recording::Recording;
use crate::series::SpeedSeries;

#[derive(Debug, thiserror::Error)]
pub enum CalibrateError {
    #[error("degenerate fit: no pair with a positive prediction")]
    DegenerateFit,
    #[error("no overlapping prediction/ground-truth samples")]
    NoOverlap,
    #[error(
        "series of {pred_len} values at offset {offset} does not fit ground truth of {gt_len}"
    )]
    LengthMismatch {
        pred_len: usize,
        offset: usize,
        gt_len: usize,
    },
    #[error("no recording carries ground truth")]
    MissingGroundTruth,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// How the scale factor is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMethod {
    /// Closed-form minimizer of `sum (gt - k*pred)^2`.
    #[default]
    LeastSquares,
    /// `median(gt / pred)` over pairs with positive prediction.
    MedianRatio,
}

impl FitMethod {
    pub fn label(&self) -> &'static str {
        match self {
            FitMethod::LeastSquares => "lsq",
            FitMethod::MedianRatio => "median",
        }
    }
}

/// A fitted image-domain-to-m/s conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFit {
    pub k: f64,
    pub method: FitMethod,
    pub n_samples: usize,
}

/// Fit the global scale over `(pred, gt)` pairs. Missing predictions must be
/// excluded upstream; at least one pair with `pred > 0` is required.
pub fn fit_scale(pairs: &[(f64, f64)], method: FitMethod) -> Result<ScaleFit, CalibrateError> {
    match method {
        FitMethod::LeastSquares => {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(pred, gt) in pairs {
                num += pred * gt;
                den += pred * pred;
            }
            if den <= 0.0 {
                return Err(CalibrateError::DegenerateFit);
            }
            Ok(ScaleFit {
                k: num / den,
                method,
                n_samples: pairs.len(),
            })
        }
        FitMethod::MedianRatio => {
            let mut ratios: Vec<f64> = pairs
                .iter()
                .filter(|(pred, _)| *pred > 0.0)
                .map(|(pred, gt)| gt / pred)
                .collect();
            if ratios.is_empty() {
                return Err(CalibrateError::DegenerateFit);
            }
            ratios.sort_by(|a, b| a.total_cmp(b));
            let n = ratios.len();
            let k = if n % 2 == 1 {
                ratios[n / 2]
            } else {
                0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
            };
            Ok(ScaleFit {
                k,
                method,
                n_samples: n,
            })
        }
    }
}

/// Multiply a series by the fitted scale; missing entries stay missing.
pub fn apply_scale(s: &SpeedSeries, k: f64) -> SpeedSeries {
    assert!(k > 0.0, "scale factor must be positive, got {k}");
    let values = s.values().iter().map(|v| v.map(|x| x * k)).collect();
    s.with_values(values)
        .expect("positive scaling preserves series invariants")
}

/// Pair a prediction series with per-frame ground truth, skipping missing
/// predictions. Ground truth must cover every predicted frame index.
pub fn paired(pred: &SpeedSeries, gt: &[f64]) -> Result<Vec<(f64, f64)>, CalibrateError> {
    let offset = pred.frame_index_offset();
    if offset + pred.len() > gt.len() {
        return Err(CalibrateError::LengthMismatch {
            pred_len: pred.len(),
            offset,
            gt_len: gt.len(),
        });
    }
    Ok(pred
        .values()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|p| (p, gt[offset + i])))
        .collect())
}

/// Root-mean-square error over pooled `(pred, gt)` pairs.
pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64, CalibrateError> {
    if pairs.is_empty() {
        return Err(CalibrateError::NoOverlap);
    }
    let sum_sq: f64 = pairs.iter().map(|(p, g)| (p - g) * (p - g)).sum();
    Ok((sum_sq / pairs.len() as f64).sqrt())
}

/// RMSE over several recordings' aligned series, pooled.
pub fn rmse_series(groups: &[(&SpeedSeries, &[f64])]) -> Result<f64, CalibrateError> {
    let mut pairs = Vec::new();
    for (pred, gt) in groups {
        pairs.extend(paired(pred, gt)?);
    }
    rmse(&pairs)
}

/// One evaluated configuration: the fitted scale, pooled RMSE, and a
/// per-recording breakdown (ordered by recording id).
#[derive(Debug, Clone)]
pub struct ConfigEvaluation {
    pub fit: ScaleFit,
    pub rmse_pooled: f64,
    pub per_recording: Vec<(String, f64)>,
    pub estimates: Vec<RecordingEstimate>,
}

/// Run the estimator over every recording, fit one pooled scale factor, and
/// report pooled plus per-recording RMSE.
///
/// Recordings without ground truth are skipped. `fit_ids`, when given,
/// restricts the recordings whose samples enter the fit (a train/eval
/// split); the RMSE always covers all recordings with ground truth.
pub fn evaluate_configuration(
    recordings: &[Recording],
    cfg: &EstimatorConfig,
    method: FitMethod,
    fit_ids: Option<&[String]>,
) -> Result<ConfigEvaluation, CalibrateError> {
    let with_gt: Vec<&Recording> = recordings
        .iter()
        .filter(|r| r.ground_truth.is_some())
        .collect();
    if with_gt.is_empty() {
        return Err(CalibrateError::MissingGroundTruth);
    }
    let estimates: Vec<RecordingEstimate> = with_gt
        .par_iter()
        .map(|rec| estimate_recording(rec, cfg))
        .collect::<Result<_, _>>()?;

    let mut fit_pairs = Vec::new();
    for (rec, est) in with_gt.iter().zip(&estimates) {
        if fit_ids.is_some_and(|ids| !ids.contains(&rec.id)) {
            continue;
        }
        let gt = rec.ground_truth.as_ref().expect("filtered above");
        fit_pairs.extend(paired(est.series(), gt)?);
    }
    let fit = fit_scale(&fit_pairs, method)?;

    let mut pooled = Vec::new();
    let mut per_recording = Vec::with_capacity(with_gt.len());
    for (rec, est) in with_gt.iter().zip(&estimates) {
        let gt = rec.ground_truth.as_ref().expect("filtered above");
        let scaled = apply_scale(est.series(), fit.k);
        let pairs = paired(&scaled, gt)?;
        per_recording.push((rec.id.clone(), rmse(&pairs)?));
        pooled.extend(pairs);
    }
    per_recording.sort_by(|a, b| a.0.cmp(&b.0));
    let rmse_pooled = rmse(&pooled)?;

    Ok(ConfigEvaluation {
        fit,
        rmse_pooled,
        per_recording,
        estimates,
    })
}
