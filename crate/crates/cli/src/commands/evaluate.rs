//! `egospeed evaluate`: RMSE table over a grid of configurations.

use std::fs;

use egospeed_core::calibrate::evaluate_configuration;
use egospeed_core::ingest::DatasetManifest;
use egospeed_core::{EstimatorConfig, EstimatorMode};

use crate::error::CliError;
use crate::report::{fmt, fmt_bool, row};
use crate::{commands, EvaluateArgs};

/// A named modification of the base estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Base,
    OfOnly,
    HorizOf,
    PixelSmooth,
    TurningComp,
}

impl Variant {
    fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "base" => Ok(Variant::Base),
            "e1" => Ok(Variant::OfOnly),
            "e2" => Ok(Variant::HorizOf),
            "e3" => Ok(Variant::PixelSmooth),
            "tc" => Ok(Variant::TurningComp),
            other => Err(CliError::config(format!(
                "unknown variant {other:?}; expected base, e1, e2, e3, or tc"
            ))),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::OfOnly => "e1",
            Variant::HorizOf => "e2",
            Variant::PixelSmooth => "e3",
            Variant::TurningComp => "tc",
        }
    }

    fn apply(&self, base: &EstimatorConfig) -> EstimatorConfig {
        let mut cfg = base.clone();
        match self {
            Variant::Base => {}
            Variant::OfOnly => cfg.mode = EstimatorMode::OfOnly,
            Variant::HorizOf => cfg.mode = EstimatorMode::HorizOfOverDisp,
            Variant::PixelSmooth => cfg.pixel_level_smoothing = true,
            Variant::TurningComp => cfg.turning_compensation = true,
        }
        cfg
    }
}

pub fn run(args: EvaluateArgs) -> Result<(), CliError> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    if manifest.recordings.is_empty() {
        return Err(CliError::data(format!(
            "no recordings in manifest {}",
            args.manifest.display()
        )));
    }
    let mut recordings = manifest.load_all()?;
    recordings.sort_by(|a, b| a.id.cmp(&b.id));
    let method = args.fit.to_method();

    let variants: Vec<Variant> = args
        .variants
        .iter()
        .map(|v| Variant::parse(v))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut recording_ids: Vec<String> = Vec::new();
    for variant in &variants {
        for crop_name in &args.crops {
            let crop = commands::parse_crop(crop_name)?;
            let base = EstimatorConfig {
                crop,
                smoothing_window: args.window,
                ..Default::default()
            };
            let cfg = variant.apply(&base);
            cfg.validate().map_err(|e| {
                CliError::config(format!("{}@{}: {}", variant.label(), crop_name, e))
            })?;
            let eval =
                evaluate_configuration(&recordings, &cfg, method, args.fit_ids.as_deref())?;
            if recording_ids.is_empty() {
                recording_ids = eval.per_recording.iter().map(|(id, _)| id.clone()).collect();
            }
            rows.push((variant.label().to_string(), crop_name.clone(), cfg, eval));
        }
    }

    let mut header = vec![
        "config".to_string(),
        "crop".to_string(),
        "mode".to_string(),
        "tc".to_string(),
        "k".to_string(),
        "rmse_pooled".to_string(),
    ];
    header.extend(recording_ids.iter().map(|id| format!("rmse_{id}")));

    let mut out = row(&header);
    out.push('\n');
    for (label, crop_name, cfg, eval) in &rows {
        let mut fields = vec![
            label.clone(),
            crop_name.clone(),
            cfg.mode.label().to_string(),
            fmt_bool(cfg.turning_compensation).to_string(),
            fmt(eval.fit.k),
            fmt(eval.rmse_pooled),
        ];
        fields.extend(eval.per_recording.iter().map(|(_, r)| fmt(*r)));
        out.push_str(&row(&fields));
        out.push('\n');
    }

    fs::create_dir_all(&args.out)?;
    let path = args.out.join("evaluation.csv");
    fs::write(&path, out)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}
