//! `egospeed metrics`: score prediction maps against ground truth.

use std::fs;
use std::path::{Path, PathBuf};

use egospeed_core::metrics::{
    depth_accumulate, flow_accumulate, DepthAccum, DepthMetrics, FlowAccum, FlowMetrics,
};
use egospeed_core::{DispFormat, FlowFormat, FlowField, ScalarField};

use crate::error::CliError;
use crate::report::{fmt, row};
use crate::{AggArg, MetricKind, MetricsArgs};

pub fn run(args: MetricsArgs) -> Result<(), CliError> {
    let pred_files = map_files(&args.pred)?;
    let gt_files = map_files(&args.gt)?;
    if pred_files.is_empty() {
        return Err(CliError::data(format!(
            "no map files under {}",
            args.pred.display()
        )));
    }
    if pred_files.len() != gt_files.len() {
        return Err(CliError::data(format!(
            "{} prediction files vs {} ground-truth files",
            pred_files.len(),
            gt_files.len()
        )));
    }

    let out = match args.kind {
        MetricKind::Flow => flow_report(&pred_files, &gt_files, args.agg)?,
        MetricKind::Depth => depth_report(&pred_files, &gt_files, args.agg)?,
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&args.out, out)?;
    println!(
        "scored {} image pairs into {}",
        pred_files.len(),
        args.out.display()
    );
    Ok(())
}

/// Map files under `dir` with a recognized extension, sorted by filename.
fn map_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))? {
        let path = entry
            .map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?
            .path();
        let known = path.extension().and_then(|e| e.to_str()).is_some_and(|e| {
            matches!(
                e.to_ascii_lowercase().as_str(),
                "flo" | "png" | "pfm" | "raw"
            )
        });
        if path.is_file() && known {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

fn load_flow(path: &Path) -> Result<FlowField, CliError> {
    let format = match extension(path).as_str() {
        "flo" => FlowFormat::Flo,
        "png" => FlowFormat::KittiPng,
        other => {
            return Err(CliError::data(format!(
                "{}: unsupported flow extension {other:?}",
                path.display()
            )))
        }
    };
    Ok(egospeed_core::ingest::read_flow(path, format)?)
}

fn load_depth(path: &Path) -> Result<ScalarField, CliError> {
    let format = match extension(path).as_str() {
        "pfm" => DispFormat::Pfm,
        "png" => DispFormat::Png16,
        "raw" => DispFormat::FloatRaw,
        other => {
            return Err(CliError::data(format!(
                "{}: unsupported depth extension {other:?}",
                path.display()
            )))
        }
    };
    Ok(egospeed_core::ingest::read_disparity(path, format, 1.0)?.into_scalar())
}

fn stem(path: &Path) -> String {
    path.file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("?")
        .to_string()
}

fn flow_row(name: &str, m: &FlowMetrics) -> String {
    row(&[name.to_string(), fmt(m.aepe), fmt(m.fl_all)])
}

fn flow_report(
    pred_files: &[PathBuf],
    gt_files: &[PathBuf],
    agg: AggArg,
) -> Result<String, CliError> {
    let mut out = String::from("file,aepe,fl_all\n");
    let mut per_image = Vec::new();
    let mut pooled = FlowAccum::default();
    for (p, g) in pred_files.iter().zip(gt_files) {
        let acc = flow_accumulate(&load_flow(p)?, &load_flow(g)?)
            .map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
        let m = acc
            .finish()
            .map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
        pooled.merge(&acc);
        out.push_str(&flow_row(&stem(p), &m));
        out.push('\n');
        per_image.push(m);
    }
    let aggregate = match agg {
        AggArg::Mean => {
            let n = per_image.len() as f64;
            FlowMetrics {
                aepe: per_image.iter().map(|m| m.aepe).sum::<f64>() / n,
                fl_all: per_image.iter().map(|m| m.fl_all).sum::<f64>() / n,
            }
        }
        AggArg::Pooled => pooled.finish()?,
    };
    out.push_str(&flow_row(agg_label(agg), &aggregate));
    out.push('\n');
    Ok(out)
}

fn depth_row(name: &str, m: &DepthMetrics) -> String {
    row(&[
        name.to_string(),
        fmt(m.rmse),
        fmt(m.rmse_log),
        fmt(m.abs_rel),
        fmt(m.sq_rel),
        fmt(m.log10),
        fmt(m.scale_inv),
    ])
}

fn depth_report(
    pred_files: &[PathBuf],
    gt_files: &[PathBuf],
    agg: AggArg,
) -> Result<String, CliError> {
    let mut out = String::from("file,rmse,rmse_log,abs_rel,sq_rel,log10,scale_inv\n");
    let mut per_image = Vec::new();
    let mut pooled = DepthAccum::default();
    for (p, g) in pred_files.iter().zip(gt_files) {
        let acc = depth_accumulate(&load_depth(p)?, &load_depth(g)?)
            .map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
        let m = acc
            .finish()
            .map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
        pooled.merge(&acc);
        out.push_str(&depth_row(&stem(p), &m));
        out.push('\n');
        per_image.push(m);
    }
    let aggregate = match agg {
        AggArg::Mean => {
            let n = per_image.len() as f64;
            DepthMetrics {
                rmse: per_image.iter().map(|m| m.rmse).sum::<f64>() / n,
                rmse_log: per_image.iter().map(|m| m.rmse_log).sum::<f64>() / n,
                abs_rel: per_image.iter().map(|m| m.abs_rel).sum::<f64>() / n,
                sq_rel: per_image.iter().map(|m| m.sq_rel).sum::<f64>() / n,
                log10: per_image.iter().map(|m| m.log10).sum::<f64>() / n,
                scale_inv: per_image.iter().map(|m| m.scale_inv).sum::<f64>() / n,
            }
        }
        AggArg::Pooled => pooled.finish()?,
    };
    out.push_str(&depth_row(agg_label(agg), &aggregate));
    out.push('\n');
    Ok(out)
}

fn agg_label(agg: AggArg) -> &'static str {
    match agg {
        AggArg::Mean => "mean",
        AggArg::Pooled => "pooled",
    }
}
