//! Flow and depth evaluation metrics for scoring ingested predictions.

use crate::field::{DisparityMap, FlowField, ScalarField};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("prediction {pred_width}x{pred_height} vs ground truth {gt_width}x{gt_height}")]
    ExtentMismatch {
        pred_width: usize,
        pred_height: usize,
        gt_width: usize,
        gt_height: usize,
    },
    #[error("no valid pixels to evaluate")]
    NoValidPixels,
}

/// Flow accuracy: average endpoint error and the outlier fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMetrics {
    /// Mean Euclidean distance to ground-truth vectors, in pixels.
    pub aepe: f64,
    /// Fraction of pixels wrong by both >= 3 px and >= 5% of the
    /// ground-truth magnitude, in [0, 1].
    pub fl_all: f64,
}

/// Depth accuracy over valid pixels, standard definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthMetrics {
    pub rmse: f64,
    pub rmse_log: f64,
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub log10: f64,
    /// Scale-invariant log error: `mean(z^2) - mean(z)^2` with
    /// `z = ln(pred) - ln(gt)`; exactly zero under any global rescaling.
    pub scale_inv: f64,
}

/// Running flow-metric sums, mergeable across images for pooled-pixel
/// aggregation.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowAccum {
    pub epe_sum: f64,
    pub outliers: usize,
    pub count: usize,
}

impl FlowAccum {
    pub fn merge(&mut self, other: &FlowAccum) {
        self.epe_sum += other.epe_sum;
        self.outliers += other.outliers;
        self.count += other.count;
    }

    pub fn finish(&self) -> Result<FlowMetrics, MetricsError> {
        if self.count == 0 {
            return Err(MetricsError::NoValidPixels);
        }
        Ok(FlowMetrics {
            aepe: self.epe_sum / self.count as f64,
            fl_all: self.outliers as f64 / self.count as f64,
        })
    }
}

/// Accumulate endpoint errors over ground-truth-valid pixels.
pub fn flow_accumulate(pred: &FlowField, gt: &FlowField) -> Result<FlowAccum, MetricsError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricsError::ExtentMismatch {
            pred_width: pred.width(),
            pred_height: pred.height(),
            gt_width: gt.width(),
            gt_height: gt.height(),
        });
    }
    let n = gt.width() * gt.height();
    let mut acc = FlowAccum::default();
    for i in 0..n {
        if !gt.valid()[i] {
            continue;
        }
        let du = pred.u()[i] - gt.u()[i];
        let dv = pred.v()[i] - gt.v()[i];
        let epe = du.hypot(dv);
        let gt_mag = gt.u()[i].hypot(gt.v()[i]);
        acc.epe_sum += epe;
        if epe >= 3.0 && epe >= 0.05 * gt_mag {
            acc.outliers += 1;
        }
        acc.count += 1;
    }
    Ok(acc)
}

/// Endpoint-error metrics over ground-truth-valid pixels.
pub fn flow_metrics(pred: &FlowField, gt: &FlowField) -> Result<FlowMetrics, MetricsError> {
    flow_accumulate(pred, gt)?.finish()
}

/// Running depth-metric sums, mergeable across images for pooled-pixel
/// aggregation.
#[derive(Debug, Clone, Copy, Default)]
pub struct DepthAccum {
    pub count: usize,
    pub sq_sum: f64,
    pub z_sum: f64,
    pub z_sq_sum: f64,
    pub abs_rel_sum: f64,
    pub sq_rel_sum: f64,
    pub log10_sum: f64,
}

impl DepthAccum {
    pub fn merge(&mut self, other: &DepthAccum) {
        self.count += other.count;
        self.sq_sum += other.sq_sum;
        self.z_sum += other.z_sum;
        self.z_sq_sum += other.z_sq_sum;
        self.abs_rel_sum += other.abs_rel_sum;
        self.sq_rel_sum += other.sq_rel_sum;
        self.log10_sum += other.log10_sum;
    }

    pub fn finish(&self) -> Result<DepthMetrics, MetricsError> {
        if self.count == 0 {
            return Err(MetricsError::NoValidPixels);
        }
        let nf = self.count as f64;
        Ok(DepthMetrics {
            rmse: (self.sq_sum / nf).sqrt(),
            rmse_log: (self.z_sq_sum / nf).sqrt(),
            abs_rel: self.abs_rel_sum / nf,
            sq_rel: self.sq_rel_sum / nf,
            log10: self.log10_sum / nf,
            scale_inv: self.z_sq_sum / nf - (self.z_sum / nf) * (self.z_sum / nf),
        })
    }
}

/// Accumulate depth errors over pixels valid in both maps with positive
/// depth on both sides; non-positive samples are excluded, not fatal.
pub fn depth_accumulate(pred: &ScalarField, gt: &ScalarField) -> Result<DepthAccum, MetricsError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricsError::ExtentMismatch {
            pred_width: pred.width(),
            pred_height: pred.height(),
            gt_width: gt.width(),
            gt_height: gt.height(),
        });
    }
    let n = gt.width() * gt.height();
    let mut acc = DepthAccum::default();
    for i in 0..n {
        let p = pred.data()[i];
        let g = gt.data()[i];
        if !(pred.valid()[i] && gt.valid()[i] && p > 0.0 && g > 0.0) {
            continue;
        }
        let diff = p - g;
        let z = p.ln() - g.ln();
        acc.sq_sum += diff * diff;
        acc.z_sum += z;
        acc.z_sq_sum += z * z;
        acc.abs_rel_sum += diff.abs() / g;
        acc.sq_rel_sum += diff * diff / g;
        acc.log10_sum += (p.log10() - g.log10()).abs();
        acc.count += 1;
    }
    Ok(acc)
}

/// Depth metrics over pixels valid in both maps with positive depth on both
/// sides.
pub fn depth_metrics(pred: &ScalarField, gt: &ScalarField) -> Result<DepthMetrics, MetricsError> {
    depth_accumulate(pred, gt)?.finish()
}

/// Convert disparity to metric depth: `Z = focal * baseline / d`; samples at
/// or below `disp_min` become invalid.
pub fn disp_to_depth(
    d: &DisparityMap,
    focal: f64,
    baseline: f64,
    disp_min: f64,
) -> ScalarField {
    let fb = focal * baseline;
    let n = d.width() * d.height();
    let mut data = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for i in 0..n {
        let di = d.d()[i];
        let ok = d.valid()[i] && di > disp_min;
        data.push(if ok { fb / di } else { 0.0 });
        valid.push(ok);
    }
    ScalarField::new(d.width(), d.height(), data, valid).expect("extent preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(w: usize, h: usize, data: Vec<f64>) -> ScalarField {
        let n = w * h;
        ScalarField::new(w, h, data, vec![true; n]).unwrap()
    }

    #[test]
    fn identical_flow_scores_zero() {
        let f = FlowField::uniform(4, 4, 2.0, -1.0);
        let m = flow_metrics(&f, &f).unwrap();
        assert_eq!(m.aepe, 0.0);
        assert_eq!(m.fl_all, 0.0);
    }

    #[test]
    fn three_pixel_error_on_slow_flow_is_an_outlier() {
        // gt (10, 0), pred (13, 0): EPE 3 >= 3 and 3 >= 0.5
        let gt = FlowField::uniform(2, 2, 10.0, 0.0);
        let pred = FlowField::uniform(2, 2, 13.0, 0.0);
        let m = flow_metrics(&pred, &gt).unwrap();
        assert_eq!(m.aepe, 3.0);
        assert_eq!(m.fl_all, 1.0);
    }

    #[test]
    fn three_pixel_error_on_fast_flow_is_not_an_outlier() {
        // gt (100, 0), pred (103, 0): EPE 3 >= 3 but 3 < 5
        let gt = FlowField::uniform(2, 2, 100.0, 0.0);
        let pred = FlowField::uniform(2, 2, 103.0, 0.0);
        let m = flow_metrics(&pred, &gt).unwrap();
        assert_eq!(m.aepe, 3.0);
        assert_eq!(m.fl_all, 0.0);
    }

    #[test]
    fn evaluation_covers_gt_valid_pixels_only() {
        let gt = FlowField::new(
            2,
            1,
            vec![10.0, 0.0],
            vec![0.0, 0.0],
            vec![true, false],
        )
        .unwrap();
        let pred = FlowField::uniform(2, 1, 14.0, 0.0);
        let m = flow_metrics(&pred, &gt).unwrap();
        assert_eq!(m.aepe, 4.0); // only the first pixel counts
    }

    #[test]
    fn fl_all_is_rotation_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 36;
        let gu: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let gv: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let pu: Vec<f64> = (0..n).map(|i| gu[i] + rng.random_range(-4.0..4.0)).collect();
        let pv: Vec<f64> = (0..n).map(|i| gv[i] + rng.random_range(-4.0..4.0)).collect();
        let theta: f64 = 0.7;
        let rot = |u: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let ru = u
                .iter()
                .zip(v)
                .map(|(a, b)| a * theta.cos() - b * theta.sin())
                .collect();
            let rv = u
                .iter()
                .zip(v)
                .map(|(a, b)| a * theta.sin() + b * theta.cos())
                .collect();
            (ru, rv)
        };
        let m1 = flow_metrics(
            &FlowField::dense(6, 6, pu.clone(), pv.clone()).unwrap(),
            &FlowField::dense(6, 6, gu.clone(), gv.clone()).unwrap(),
        )
        .unwrap();
        let (pru, prv) = rot(&pu, &pv);
        let (gru, grv) = rot(&gu, &gv);
        let m2 = flow_metrics(
            &FlowField::dense(6, 6, pru, prv).unwrap(),
            &FlowField::dense(6, 6, gru, grv).unwrap(),
        )
        .unwrap();
        assert_eq!(m1.fl_all, m2.fl_all);
        assert!((m1.aepe - m2.aepe).abs() < 1e-12);
    }

    #[test]
    fn identical_depth_scores_zero() {
        let d = scalar(3, 3, (1..=9).map(|i| i as f64).collect());
        let m = depth_metrics(&d, &d).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.rmse_log, 0.0);
        assert_eq!(m.abs_rel, 0.0);
        assert_eq!(m.sq_rel, 0.0);
        assert_eq!(m.log10, 0.0);
        assert!(m.scale_inv.abs() < 1e-15);
    }

    #[test]
    #[allow(clippy::approx_constant)] // frozen expected value
    fn doubled_depth_has_known_metrics() {
        let gt = scalar(4, 4, (1..=16).map(|i| i as f64).collect());
        let pred = gt.map(|v| 2.0 * v);
        let m = depth_metrics(&pred, &gt).unwrap();
        assert!((m.abs_rel - 1.0).abs() < 1e-12);
        assert!((m.rmse_log - 2.0f64.ln()).abs() < 1e-12);
        assert!((m.rmse_log - 0.693147).abs() < 1e-6);
        assert!(m.scale_inv.abs() <= 1e-10);
    }

    #[test]
    fn scale_inv_ignores_any_global_rescale() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let gt = scalar(4, 4, (0..16).map(|_| rng.random_range(1.0..80.0)).collect());
        let pred = scalar(4, 4, (0..16).map(|_| rng.random_range(1.0..80.0)).collect());
        let m1 = depth_metrics(&pred, &gt).unwrap();
        let m2 = depth_metrics(&pred.map(|v| 17.3 * v), &gt).unwrap();
        assert!((m1.scale_inv - m2.scale_inv).abs() <= 1e-10);
    }

    #[test]
    fn brute_force_depth_agreement() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let n = 16;
        let gvals: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..50.0)).collect();
        let pvals: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..50.0)).collect();
        let gt = scalar(4, 4, gvals.clone());
        let pred = scalar(4, 4, pvals.clone());
        let m = depth_metrics(&pred, &gt).unwrap();
        let zs: Vec<f64> = pvals
            .iter()
            .zip(&gvals)
            .map(|(p, g)| p.ln() - g.ln())
            .collect();
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let rmse_ref = mean(
            &pvals
                .iter()
                .zip(&gvals)
                .map(|(p, g)| (p - g) * (p - g))
                .collect::<Vec<_>>(),
        )
        .sqrt();
        assert!((m.rmse - rmse_ref).abs() <= 1e-12 * rmse_ref.max(1.0));
        let scale_inv_ref =
            mean(&zs.iter().map(|z| z * z).collect::<Vec<_>>()) - mean(&zs) * mean(&zs);
        assert!((m.scale_inv - scale_inv_ref).abs() <= 1e-12);
    }

    #[test]
    fn any_deviation_scores_nonzero() {
        let gt = FlowField::uniform(3, 3, 1.0, 1.0);
        let mut pu = vec![1.0; 9];
        pu[4] = 1.5;
        let pred = FlowField::dense(3, 3, pu, vec![1.0; 9]).unwrap();
        assert!(flow_metrics(&pred, &gt).unwrap().aepe > 0.0);

        let gd = scalar(3, 3, vec![4.0; 9]);
        let mut pvals = vec![4.0; 9];
        pvals[0] = 4.5;
        let pd = scalar(3, 3, pvals);
        let m = depth_metrics(&pd, &gd).unwrap();
        assert!(m.rmse > 0.0 && m.abs_rel > 0.0 && m.rmse_log > 0.0);
    }

    #[test]
    fn non_positive_depth_is_excluded_not_fatal() {
        let gt =
            ScalarField::new(2, 1, vec![0.0, 4.0], vec![true, true]).unwrap();
        let pred = scalar(2, 1, vec![3.0, 5.0]);
        let m = depth_metrics(&pred, &gt).unwrap();
        assert_eq!(m.rmse, 1.0); // only the second pixel counts
    }

    #[test]
    fn all_invalid_is_an_error() {
        let gt = ScalarField::new(2, 1, vec![1.0, 1.0], vec![false, false]).unwrap();
        let pred = scalar(2, 1, vec![1.0, 1.0]);
        assert!(matches!(
            depth_metrics(&pred, &gt),
            Err(MetricsError::NoValidPixels)
        ));
    }

    #[test]
    fn disp_to_depth_inverts_and_masks() {
        let d = DisparityMap::dense(3, 1, vec![2.0, 0.005, 0.5]).unwrap();
        let z = disp_to_depth(&d, 700.0, 0.54, 0.01);
        assert!((z.data()[0] - 700.0 * 0.54 / 2.0).abs() < 1e-12);
        assert!(!z.valid()[1]); // at/below disp_min
        assert!(z.valid()[2]);
    }
}
