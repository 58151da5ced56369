//! Acceptance suite. Each test covers one release criterion and prints a
//! single pass/fail line (visible with `-- --nocapture`).

use std::fs;
use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use egospeed_core::calibrate::{self, FitMethod};
use egospeed_core::ingest;
use egospeed_core::metrics;
use egospeed_core::pipeline::{self, estimate_frames};
use egospeed_core::synth::{self, scenario, CameraModel, MotionSample, SyntheticScene};
use egospeed_core::{
    CropRect, DisparityMap, EstimatorConfig, EstimatorMode, FlowField, ScalarField, SpeedSeries,
};

fn criterion(number: u32, what: &str, body: impl FnOnce()) {
    match std::panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("ACCEPTANCE {number} PASS  {what}"),
        Err(cause) => {
            println!("ACCEPTANCE {number} FAIL  {what}");
            std::panic::resume_unwind(cause);
        }
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

/// 320x96 camera with KITTI-like proportions; fast to render.
fn cam() -> CameraModel {
    CameraModel {
        fx: 180.0,
        fy: 180.0,
        cx: 160.0,
        cy: 48.0,
        baseline: 0.54,
        width: 320,
        height: 96,
        dt: 0.1,
    }
}

/// Analysis crop with every pixel at least 20 px from the principal point,
/// so the flow threshold never cuts into these scenes' support.
fn crop() -> CropRect {
    CropRect::new(180, 20, 100, 56).unwrap()
}

fn window1(crop: Option<CropRect>) -> EstimatorConfig {
    EstimatorConfig {
        crop,
        smoothing_window: 1,
        ..Default::default()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

#[test]
fn acceptance_01_reproduction_recipe_documented() {
    criterion(1, "KITTI reproduction recipe documented (README + script)", || {
        let root = repo_root();
        let readme = fs::read_to_string(root.join("README.md")).expect("README.md");
        assert!(
            readme.contains("Reproducing the KITTI reference result"),
            "README must document the reproduction recipe"
        );
        assert!(readme.contains("flow_format"), "README must show the manifest grammar");
        assert!(
            readme.matches("2011_09_26_drive_").count() >= 15,
            "README must list the 15 evaluation drives"
        );
        assert!(readme.contains("scripts/reproduce_kitti.sh"));

        let script =
            fs::read_to_string(root.join("scripts/reproduce_kitti.sh")).expect("script");
        assert!(script.contains("EXPECTED=0.977"));
        assert!(script.contains("TOLERANCE=0.15"));
        assert!(script.contains("--variants base,tc"));
        assert!(script.contains("--crops full"));
    });
}

#[test]
fn acceptance_02_synthetic_linearity() {
    criterion(2, "pre-scale estimates proportional to V in {5,10,20} within 1e-6", || {
        let started = Instant::now();
        let cam = cam();
        let cfg = window1(Some(crop()));
        let ratio = |vz: f64| -> f64 {
            let motion = vec![MotionSample::forward(vz); 10];
            let scene = SyntheticScene::random_smooth(&cam, 1234, 8.0, 30.0, motion).unwrap();
            let frames = synth::render_frames(&scene, &cam);
            let est = estimate_frames(&frames, &cfg, "lin").unwrap();
            est.smoothed.get(3).unwrap() / vz
        };
        let r5 = ratio(5.0);
        let r10 = ratio(10.0);
        let r20 = ratio(20.0);
        assert!(rel_close(r10, r5, 1e-6), "{r10} vs {r5}");
        assert!(rel_close(r20, r5, 1e-6), "{r20} vs {r5}");
        let elapsed = started.elapsed();
        assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    });
}

#[test]
fn acceptance_03_depth_normalization_contrast() {
    criterion(3, "doubling depths: base invariant to 1e-9, flow-only halves to 1e-9", || {
        let cam = cam();
        let motion = vec![MotionSample::forward(10.0); 6];
        let near = SyntheticScene::random_smooth(&cam, 77, 8.0, 30.0, motion.clone()).unwrap();
        let far = SyntheticScene::new(near.depth().map(|z| 2.0 * z), motion).unwrap();

        let run = |scene: &SyntheticScene, mode: EstimatorMode| -> f64 {
            let cfg = EstimatorConfig {
                mode,
                ..window1(Some(crop()))
            };
            let frames = synth::render_frames(scene, &cam);
            let est = estimate_frames(&frames, &cfg, "depth").unwrap();
            est.smoothed.get(2).unwrap()
        };

        let base_near = run(&near, EstimatorMode::OfOverDisp);
        let base_far = run(&far, EstimatorMode::OfOverDisp);
        assert!(
            rel_close(base_far, base_near, 1e-9),
            "base: {base_far} vs {base_near}"
        );

        let e1_near = run(&near, EstimatorMode::OfOnly);
        let e1_far = run(&far, EstimatorMode::OfOnly);
        assert!(
            rel_close(e1_far, 0.5 * e1_near, 1e-9),
            "flow-only: {e1_far} vs {}",
            0.5 * e1_near
        );
    });
}

#[test]
fn acceptance_04_scale_fit_recovery() {
    criterion(4, "least-squares fit recovers the analytic scale within 1e-9", || {
        let cam = cam();
        let crop = crop();
        let cfg = window1(Some(crop));
        let mut pairs = Vec::new();
        for (vz, z) in [(5.0, 40.0), (10.0, 20.0), (20.0, 10.0)] {
            let scene =
                SyntheticScene::constant_depth(&cam, z, vec![MotionSample::forward(vz); 12])
                    .unwrap();
            let frames = synth::render_frames(&scene, &cam);
            let est = estimate_frames(&frames, &cfg, "fit").unwrap();
            pairs.extend(est.smoothed.values().iter().flatten().map(|&p| (p, vz)));
        }
        let k_true = synth::analytic_scale(&cam, &crop);
        let lsq = calibrate::fit_scale(&pairs, FitMethod::LeastSquares).unwrap();
        assert!(rel_close(lsq.k, k_true, 1e-9), "lsq {} vs {k_true}", lsq.k);

        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(p, g)| (p * lsq.k, g)).collect();
        let rmse = calibrate::rmse(&scaled).unwrap();
        assert!(rmse < 1e-6, "post-fit RMSE {rmse}");

        let med = calibrate::fit_scale(&pairs, FitMethod::MedianRatio).unwrap();
        assert!(rel_close(med.k, lsq.k, 1e-9), "median {} vs lsq {}", med.k, lsq.k);
    });
}

#[test]
fn acceptance_05_turning_compensation() {
    criterion(5, "yaw segment: base RMSE > 1 m/s, TC RMSE < 0.05 m/s, flags exact", || {
        let cam = cam();
        let (motion, yaw_frames) = scenario::turn_profile(90, 10.0, 0.1);
        let scene = SyntheticScene::random_smooth(&cam, 4321, 8.0, 30.0, motion).unwrap();
        let frames = synth::render_frames(&scene, &cam);
        let gt = scene.ground_truth();

        let base_cfg = window1(None);
        let tc_cfg = EstimatorConfig {
            turning_compensation: true,
            ..base_cfg.clone()
        };
        let base = estimate_frames(&frames, &base_cfg, "turn").unwrap();
        let tc = estimate_frames(&frames, &tc_cfg, "turn").unwrap();

        let fitted_k = |est: &pipeline::RecordingEstimate| -> f64 {
            let pairs = calibrate::paired(est.series(), &gt).unwrap();
            calibrate::fit_scale(&pairs, FitMethod::LeastSquares).unwrap().k
        };
        let segment_rmse = |est: &pipeline::RecordingEstimate, k: f64| -> f64 {
            let pairs: Vec<(f64, f64)> = yaw_frames
                .clone()
                .filter_map(|t| est.smoothed.get(t).map(|v| (v * k, gt[t])))
                .collect();
            calibrate::rmse(&pairs).unwrap()
        };

        let base_rmse = segment_rmse(&base, fitted_k(&base));
        let tc_rmse = segment_rmse(&tc, fitted_k(&tc));
        assert!(base_rmse > 1.0, "base over the yaw segment: {base_rmse}");
        assert!(tc_rmse < 0.05, "TC over the yaw segment: {tc_rmse}");

        let yaw_total = yaw_frames.len();
        let yaw_triggered = tc
            .frames
            .iter()
            .enumerate()
            .filter(|(t, f)| yaw_frames.contains(t) && f.tc_triggered)
            .count();
        assert!(
            yaw_triggered as f64 >= 0.95 * yaw_total as f64,
            "TC fired on {yaw_triggered}/{yaw_total} yaw frames"
        );
        for (t, frame) in tc.frames.iter().enumerate() {
            if !yaw_frames.contains(&t) {
                assert!(!frame.tc_triggered, "TC fired on translation frame {t}");
            }
        }
    });
}

#[test]
fn acceptance_06_brute_force_equivalence() {
    criterion(6, "six operations match naive-loop oracles on 100 instances each", || {
        frame_speed_vs_oracle(100);
        smooth_series_vs_oracle(100);
        pixelwise_vs_oracle(100);
        rmse_vs_oracle(100);
        flow_metrics_vs_oracle(100);
        depth_metrics_vs_oracle(100);
    });
}

const ORACLE_TOL: f64 = 1e-12;

fn assert_opt_close(got: Option<f64>, want: Option<f64>, what: &str) {
    match (got, want) {
        (Some(a), Some(b)) => assert!(
            (a - b).abs() <= ORACLE_TOL * b.abs().max(1.0),
            "{what}: {a} vs {b}"
        ),
        (a, b) => assert_eq!(a, b, "{what}"),
    }
}

fn frame_speed_vs_oracle(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    for case in 0..instances {
        let w = rng.random_range(1..=16);
        let h = rng.random_range(1..=16);
        let n = w * h;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let dd: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let fvalid: Vec<bool> = (0..n).map(|_| rng.random_range(0..6) > 0).collect();
        let dvalid: Vec<bool> = (0..n).map(|_| rng.random_range(0..6) > 0).collect();
        let cw = rng.random_range(1..=w);
        let ch = rng.random_range(1..=h);
        let cx = rng.random_range(0..=w - cw);
        let cy = rng.random_range(0..=h - ch);
        let mode = match case % 3 {
            0 => EstimatorMode::OfOverDisp,
            1 => EstimatorMode::OfOnly,
            _ => EstimatorMode::HorizOfOverDisp,
        };
        let cfg = EstimatorConfig {
            mode,
            crop: Some(CropRect::new(cx, cy, cw, ch).unwrap()),
            smoothing_window: 1,
            ..Default::default()
        };
        let f = FlowField::new(w, h, u.clone(), v.clone(), fvalid.clone()).unwrap();
        let d = DisparityMap::new(w, h, dd.clone(), dvalid.clone()).unwrap();
        let est = pipeline::frame_speed(&f, &d, &cfg).unwrap();

        let mut of = Vec::new();
        let mut disp = Vec::new();
        for y in cy..cy + ch {
            for x in cx..cx + cw {
                let i = y * w + x;
                let quantity = match mode {
                    EstimatorMode::HorizOfOverDisp => u[i].abs(),
                    _ => (u[i] * u[i] + v[i] * v[i]).sqrt(),
                };
                if fvalid[i] && quantity > cfg.thresholds.of_min {
                    of.push(quantity);
                }
                // negative disparity samples were demoted at construction
                if dvalid[i] && dd[i] >= 0.0 && dd[i] > cfg.thresholds.disp_min {
                    disp.push(dd[i]);
                }
            }
        }
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let want = match mode {
            EstimatorMode::OfOnly => (!of.is_empty()).then(|| mean(&of)),
            _ => (!of.is_empty() && !disp.is_empty()).then(|| mean(&of) / mean(&disp)),
        };
        assert_opt_close(est.raw_value, want, "frame_speed");
        assert_eq!(est.valid_pixel_count, of.len());
    }
}

fn smooth_series_vs_oracle(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(602);
    for _ in 0..instances {
        let n = rng.random_range(1..=200);
        let window = 2 * rng.random_range(0..=15) + 1;
        let vals: Vec<Option<f64>> = (0..n)
            .map(|_| (rng.random_range(0..5) > 0).then(|| rng.random_range(0.0..40.0)))
            .collect();
        let s = SpeedSeries::new("o", 0, vals.clone()).unwrap();
        let out = pipeline::smooth_series(&s, window).unwrap();
        let half = window / 2;
        for i in 0..n {
            let want = vals[i].map(|_| {
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(n - 1);
                let kept: Vec<f64> = vals[lo..=hi].iter().flatten().copied().collect();
                kept.iter().sum::<f64>() / kept.len() as f64
            });
            assert_opt_close(out.get(i), want, "smooth_series");
        }
    }
}

fn pixelwise_vs_oracle(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(603);
    for _ in 0..instances {
        let w = rng.random_range(1..=8);
        let h = rng.random_range(1..=8);
        let t_n = rng.random_range(1..=30);
        let window = 2 * rng.random_range(0..=7) + 1;
        let frames: Vec<ScalarField> = (0..t_n)
            .map(|_| {
                let data: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.0..9.0)).collect();
                let valid: Vec<bool> = (0..w * h).map(|_| rng.random_range(0..4) > 0).collect();
                ScalarField::new(w, h, data, valid).unwrap()
            })
            .collect();
        let out = pipeline::smooth_fields_pixelwise(&frames, window).unwrap();
        let half = window / 2;
        for t in 0..t_n {
            for px in 0..w * h {
                let want = frames[t].valid()[px].then(|| {
                    let lo = t.saturating_sub(half);
                    let hi = (t + half).min(t_n - 1);
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for frame in &frames[lo..=hi] {
                        if frame.valid()[px] {
                            sum += frame.data()[px];
                            count += 1;
                        }
                    }
                    sum / count as f64
                });
                let got = out[t].valid()[px].then(|| out[t].data()[px]);
                assert_opt_close(got, want, "smooth_fields_pixelwise");
            }
        }
    }
}

fn rmse_vs_oracle(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(604);
    for _ in 0..instances {
        let n = rng.random_range(1..=200);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..30.0), rng.random_range(0.0..30.0)))
            .collect();
        let got = calibrate::rmse(&pairs).unwrap();
        let mut sq = 0.0;
        for &(p, g) in &pairs {
            sq += (p - g) * (p - g);
        }
        let want = (sq / n as f64).sqrt();
        assert!((got - want).abs() <= ORACLE_TOL * want.max(1.0), "rmse");
    }
}

fn flow_metrics_vs_oracle(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(605);
    for _ in 0..instances {
        let w = rng.random_range(1..=16);
        let h = rng.random_range(1..=16);
        let n = w * h;
        let gu: Vec<f64> = (0..n).map(|_| rng.random_range(-30.0..30.0)).collect();
        let gv: Vec<f64> = (0..n).map(|_| rng.random_range(-30.0..30.0)).collect();
        let pu: Vec<f64> = (0..n).map(|i| gu[i] + rng.random_range(-5.0..5.0)).collect();
        let pv: Vec<f64> = (0..n).map(|i| gv[i] + rng.random_range(-5.0..5.0)).collect();
        let gvalid: Vec<bool> = (0..n).map(|_| rng.random_range(0..5) > 0).collect();
        if !gvalid.iter().any(|&b| b) {
            continue;
        }
        let gt = FlowField::new(w, h, gu.clone(), gv.clone(), gvalid.clone()).unwrap();
        let pred = FlowField::dense(w, h, pu.clone(), pv.clone()).unwrap();
        let got = metrics::flow_metrics(&pred, &gt).unwrap();

        let mut epes = Vec::new();
        let mut outliers = 0usize;
        for i in 0..n {
            if !gvalid[i] {
                continue;
            }
            let epe = ((pu[i] - gu[i]).powi(2) + (pv[i] - gv[i]).powi(2)).sqrt();
            let mag = (gu[i] * gu[i] + gv[i] * gv[i]).sqrt();
            if epe >= 3.0 && epe >= 0.05 * mag {
                outliers += 1;
            }
            epes.push(epe);
        }
        let want_aepe = epes.iter().sum::<f64>() / epes.len() as f64;
        let want_fl = outliers as f64 / epes.len() as f64;
        assert!((got.aepe - want_aepe).abs() <= ORACLE_TOL * want_aepe.max(1.0));
        assert!((got.fl_all - want_fl).abs() <= ORACLE_TOL);
    }
}

fn depth_metrics_vs_oracle(instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..instances {
        let w = rng.random_range(1..=16);
        let h = rng.random_range(1..=16);
        let n = w * h;
        let gd: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..80.0)).collect();
        let pd: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..80.0)).collect();
        let valid: Vec<bool> = (0..n).map(|_| rng.random_range(0..5) > 0).collect();
        if !valid.iter().any(|&b| b) {
            continue;
        }
        let gt = ScalarField::new(w, h, gd.clone(), valid.clone()).unwrap();
        let pred = ScalarField::new(w, h, pd.clone(), vec![true; n]).unwrap();
        let got = metrics::depth_metrics(&pred, &gt).unwrap();

        let mut count = 0.0;
        let (mut sq, mut z_sum, mut z_sq, mut abs_rel, mut sq_rel, mut l10) =
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            if !valid[i] {
                continue;
            }
            let (p, g) = (pd[i], gd[i]);
            let z = p.ln() - g.ln();
            sq += (p - g) * (p - g);
            z_sum += z;
            z_sq += z * z;
            abs_rel += (p - g).abs() / g;
            sq_rel += (p - g) * (p - g) / g;
            l10 += (p.log10() - g.log10()).abs();
            count += 1.0;
        }
        let close = |a: f64, b: f64| (a - b).abs() <= ORACLE_TOL * b.abs().max(1.0);
        assert!(close(got.rmse, (sq / count).sqrt()));
        assert!(close(got.rmse_log, (z_sq / count).sqrt()));
        assert!(close(got.abs_rel, abs_rel / count));
        assert!(close(got.sq_rel, sq_rel / count));
        assert!(close(got.log10, l10 / count));
        assert!(close(
            got.scale_inv,
            z_sq / count - (z_sum / count) * (z_sum / count)
        ));
    }
}

#[test]
fn acceptance_07_format_fidelity() {
    criterion(7, ".flo byte-identical x50, KITTI PNG exact, PFM bottom-up order", || {
        // 50 random fields re-encode byte-identically
        let mut rng = ChaCha8Rng::seed_from_u64(701);
        for _ in 0..50 {
            let w = rng.random_range(1..=12);
            let h = rng.random_range(1..=12);
            let n = w * h;
            let u: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-1.0e4f32..1.0e4) as f64)
                .collect();
            let v: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-1.0e4f32..1.0e4) as f64)
                .collect();
            let valid: Vec<bool> = (0..n).map(|_| rng.random_range(0..5) > 0).collect();
            let f = FlowField::new(w, h, u, v, valid).unwrap();
            let bytes = ingest::encode_flo(&f);
            let back = ingest::decode_flo(&bytes, Path::new("mem")).unwrap();
            assert_eq!(bytes, ingest::encode_flo(&back), "byte round trip");
        }

        // KITTI PNG is exact on multiples of 1/64 within the 16-bit range
        let tmp = tempfile::tempdir().unwrap();
        for case in 0..20 {
            let w = rng.random_range(1..=8);
            let h = rng.random_range(1..=8);
            let n = w * h;
            let q = |rng: &mut ChaCha8Rng| rng.random_range(-32768i32..=32767) as f64 / 64.0;
            let u: Vec<f64> = (0..n).map(|_| q(&mut rng)).collect();
            let v: Vec<f64> = (0..n).map(|_| q(&mut rng)).collect();
            let f = FlowField::dense(w, h, u, v).unwrap();
            let path = tmp.path().join(format!("{case}.png"));
            ingest::write_kitti_flow_png(&f, &path).unwrap();
            let back = ingest::read_kitti_flow_png(&path).unwrap();
            assert_eq!(back.u(), f.u());
            assert_eq!(back.v(), f.v());
        }

        // hand-built 2x2 PFM: rows are stored bottom-to-top
        let mut pfm = b"Pf\n2 2\n-1.0\n".to_vec();
        for sample in [0.0f32, 1.0, 2.0, 3.0] {
            pfm.extend_from_slice(&sample.to_le_bytes());
        }
        let d = ingest::decode_pfm(&pfm, Path::new("mem"), 1.0).unwrap();
        assert_eq!(d.d(), &[2.0, 3.0, 0.0, 1.0], "first stored row is the bottom image row");
    });
}

#[test]
#[allow(clippy::approx_constant)] // frozen expected value
fn acceptance_08_metric_sanity() {
    criterion(8, "doubled depth and 3px/5% flow boundary cases score as derived", || {
        let mut rng = ChaCha8Rng::seed_from_u64(801);
        let gt_vals: Vec<f64> = (0..64).map(|_| rng.random_range(1.0..60.0)).collect();
        let gt = ScalarField::new(8, 8, gt_vals, vec![true; 64]).unwrap();
        let pred = gt.map(|z| 2.0 * z);
        let m = metrics::depth_metrics(&pred, &gt).unwrap();
        assert!((m.abs_rel - 1.0).abs() < 5e-7, "abs_rel {}", m.abs_rel);
        assert!((m.rmse_log - 0.693147).abs() <= 1e-6, "rmse_log {}", m.rmse_log);
        assert!(m.scale_inv <= 1e-10, "scale_inv {}", m.scale_inv);

        let flow = |gu: f64, pu: f64| {
            metrics::flow_metrics(
                &FlowField::uniform(3, 3, pu, 0.0),
                &FlowField::uniform(3, 3, gu, 0.0),
            )
            .unwrap()
        };
        let slow = flow(10.0, 13.0); // epe 3 >= 3 and >= 0.5
        assert_eq!(slow.fl_all, 1.0);
        assert_eq!(slow.aepe, 3.0);
        let fast = flow(100.0, 103.0); // epe 3 >= 3 but < 5
        assert_eq!(fast.fl_all, 0.0);
        assert_eq!(fast.aepe, 3.0);
    });
}

#[test]
fn acceptance_09_end_to_end_determinism() {
    criterion(9, "estimate and evaluate byte-identical across reruns and thread counts", || {
        let tmp = tempfile::tempdir().unwrap();
        let data = tmp.path().join("data");
        let run = |args: &[&str], threads: &str| {
            let out = Command::new(env!("CARGO_BIN_EXE_egospeed"))
                .args(args)
                .env("EGOSPEED_THREADS", threads)
                .output()
                .expect("spawn egospeed");
            assert!(
                out.status.success(),
                "egospeed {args:?} failed:\n{}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        run(
            &["synth", "--scenario", "suite", "--frames", "24", "--out", data.to_str().unwrap()],
            "1",
        );
        let manifest = data.join("dataset.manifest");

        let mut estimate_snaps: Vec<Vec<u8>> = Vec::new();
        let mut evaluate_snaps: Vec<Vec<u8>> = Vec::new();
        for (tag, threads) in [("t1a", "1"), ("t1b", "1"), ("t8", "8")] {
            let est = tmp.path().join(format!("est_{tag}"));
            run(
                &[
                    "estimate",
                    "--manifest",
                    manifest.to_str().unwrap(),
                    "--crop",
                    "175:25:100:60",
                    "--out",
                    est.to_str().unwrap(),
                ],
                threads,
            );
            let mut bytes = Vec::new();
            for f in ["suite_000.csv", "suite_001.csv", "suite_002.csv", "scale.csv"] {
                bytes.extend(fs::read(est.join(f)).unwrap());
            }
            estimate_snaps.push(bytes);

            let eval = tmp.path().join(format!("eval_{tag}"));
            run(
                &[
                    "evaluate",
                    "--manifest",
                    manifest.to_str().unwrap(),
                    "--variants",
                    "base,e1",
                    "--crops",
                    "175:25:100:60",
                    "--out",
                    eval.to_str().unwrap(),
                ],
                threads,
            );
            evaluate_snaps.push(fs::read(eval.join("evaluation.csv")).unwrap());
        }
        assert_eq!(estimate_snaps[0], estimate_snaps[1], "estimate rerun differs");
        assert_eq!(estimate_snaps[0], estimate_snaps[2], "estimate thread count changes output");
        assert_eq!(evaluate_snaps[0], evaluate_snaps[1], "evaluate rerun differs");
        assert_eq!(evaluate_snaps[0], evaluate_snaps[2], "evaluate thread count changes output");
    });
}
