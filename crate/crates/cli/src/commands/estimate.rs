//! `egospeed estimate`: per-recording CSV speed traces.

use std::fs;
use std::io::Write;

use rayon::prelude::*;

use egospeed_core::calibrate::{apply_scale, fit_scale, paired, ScaleFit};
use egospeed_core::ingest::DatasetManifest;
use egospeed_core::pipeline::{estimate_recording, RecordingEstimate};
use egospeed_core::Recording;

use crate::error::CliError;
use crate::report::{fmt, fmt_bool, fmt_opt, row};
use crate::{commands, EstimateArgs};

pub fn run(args: EstimateArgs) -> Result<(), CliError> {
    let cfg = commands::build_config(&args.estimator)?;
    if let Some(k) = args.scale {
        if !k.is_finite() || k <= 0.0 {
            return Err(CliError::config(format!("--scale must be > 0, got {k}")));
        }
    }

    let manifest = DatasetManifest::load(&args.manifest)?;
    if manifest.recordings.is_empty() {
        return Err(CliError::data(format!(
            "no recordings in manifest {}",
            args.manifest.display()
        )));
    }
    let mut recordings = manifest.load_all()?;
    recordings.sort_by(|a, b| a.id.cmp(&b.id));

    let estimates: Vec<RecordingEstimate> = recordings
        .par_iter()
        .map(|rec| estimate_recording(rec, &cfg))
        .collect::<Result<_, _>>()?;

    let fit = resolve_scale(&args, &recordings, &estimates)?;

    fs::create_dir_all(&args.out)?;
    for (rec, est) in recordings.iter().zip(&estimates) {
        write_trace(rec, est, fit.k, &args.out.join(format!("{}.csv", rec.id)))?;
    }
    write_scale(&fit, &args.out.join("scale.csv"))?;
    println!(
        "estimated {} recordings; k = {} ({}, {} samples)",
        recordings.len(),
        fmt(fit.k),
        fit.method.label(),
        fit.n_samples
    );
    Ok(())
}

/// Use the explicit `--scale`, or fit one pooled over every recording with
/// ground truth; without either, traces stay in the image domain (k = 1).
fn resolve_scale(
    args: &EstimateArgs,
    recordings: &[Recording],
    estimates: &[RecordingEstimate],
) -> Result<ScaleFit, CliError> {
    let method = args.fit.to_method();
    if let Some(k) = args.scale {
        return Ok(ScaleFit {
            k,
            method,
            n_samples: 0,
        });
    }
    let mut pairs = Vec::new();
    for (rec, est) in recordings.iter().zip(estimates) {
        if let Some(gt) = &rec.ground_truth {
            pairs.extend(paired(est.series(), gt)?);
        }
    }
    if pairs.is_empty() {
        return Ok(ScaleFit {
            k: 1.0,
            method,
            n_samples: 0,
        });
    }
    Ok(fit_scale(&pairs, method)?)
}

fn write_trace(
    rec: &Recording,
    est: &RecordingEstimate,
    k: f64,
    path: &std::path::Path,
) -> Result<(), CliError> {
    let scaled = apply_scale(est.series(), k);
    let mut out = String::from("frame_index,raw,smoothed,scaled,gt,tc_triggered\n");
    for (i, frame) in est.frames.iter().enumerate() {
        let gt = rec.ground_truth.as_ref().map(|g| g[i]);
        out.push_str(&row(&[
            frame.frame_index.to_string(),
            fmt_opt(est.raw.get(i)),
            fmt_opt(est.smoothed.get(i)),
            fmt_opt(scaled.get(i)),
            fmt_opt(gt),
            fmt_bool(frame.tc_triggered).to_string(),
        ]));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

fn write_scale(fit: &ScaleFit, path: &std::path::Path) -> Result<(), CliError> {
    let mut out = String::from("method,k,n_samples\n");
    out.push_str(&row(&[
        fit.method.label().to_string(),
        fmt(fit.k),
        fit.n_samples.to_string(),
    ]));
    out.push('\n');
    fs::write(path, out)?;
    Ok(())
}
