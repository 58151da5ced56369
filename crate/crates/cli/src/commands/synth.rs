//! `egospeed synth`: write a synthetic dataset with exact ground truth.

use egospeed_core::synth::{scenario, CameraModel};

use crate::error::CliError;
use crate::SynthArgs;

pub fn run(args: SynthArgs) -> Result<(), CliError> {
    let scenario: scenario::Scenario = args.scenario.parse().map_err(CliError::Config)?;
    if args.frames < 3 {
        return Err(CliError::config(format!(
            "--frames must be at least 3, got {}",
            args.frames
        )));
    }
    if !(args.cam_scale > 0.0 && args.cam_scale <= 1.0) {
        return Err(CliError::config(format!(
            "--cam-scale must be in (0, 1], got {}",
            args.cam_scale
        )));
    }
    let cam = CameraModel::default().scaled(args.cam_scale);
    std::fs::create_dir_all(&args.out)?;
    let manifest = scenario::generate(scenario, &cam, args.frames, args.seed, &args.out)?;
    println!("wrote {} dataset, manifest {}", scenario.name(), manifest.display());
    Ok(())
}
