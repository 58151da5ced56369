//! Parsers for the on-disk flow, disparity, and ground-truth formats, plus
//! the dataset manifest that resolves them into [`Recording`]s.
//!
//! All parsers are pure per-file; callers may parse many files concurrently.

mod disparity;
mod flo;
mod kitti_png;
mod manifest;
mod oxts;

use std::path::{Path, PathBuf};

pub use disparity::{decode_pfm, read_disparity, write_float_raw, write_pfm, write_png16};
pub use flo::{decode_flo, encode_flo, read_flo, write_flo};
pub use kitti_png::{read_kitti_flow_png, write_kitti_flow_png};
pub use manifest::{DatasetManifest, RecordingEntry};
pub use manifest::render_manifest;
pub use oxts::{oxts_record, read_oxts_speed, read_oxts_speed_with};

use crate::field::{DisparityMap, FlowField};
use crate::recording::{DispFormat, FlowFormat};

/// KITTI drive identifiers of the evaluation recordings.
pub const KITTI_DRIVE_IDS: [&str; 15] = [
    "2011_09_26_drive_0001",
    "2011_09_26_drive_0002",
    "2011_09_26_drive_0005",
    "2011_09_26_drive_0009",
    "2011_09_26_drive_0014",
    "2011_09_26_drive_0019",
    "2011_09_26_drive_0027",
    "2011_09_26_drive_0048",
    "2011_09_26_drive_0056",
    "2011_09_26_drive_0059",
    "2011_09_26_drive_0084",
    "2011_09_26_drive_0091",
    "2011_09_26_drive_0095",
    "2011_09_26_drive_0096",
    "2011_09_26_drive_0104",
];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad .flo magic {got}, expected 202021.25")]
    BadMagic { path: PathBuf, got: f32 },
    #[error("{path}: truncated file, needed {needed} bytes, got {got}")]
    TruncatedFile {
        path: PathBuf,
        needed: usize,
        got: usize,
    },
    #[error("{path}: {reason}")]
    BadPng { path: PathBuf, reason: String },
    #[error("{path}: expected {expected}, got {got}")]
    WrongChannelCount {
        path: PathBuf,
        expected: &'static str,
        got: String,
    },
    #[error("{path}: bad header: {reason}")]
    BadHeader { path: PathBuf, reason: String },
    #[error("no frame files found under {0}")]
    MissingFrameFile(PathBuf),
    #[error("{path}: {got} fields, oxts records need at least 30")]
    TooFewFields { path: PathBuf, got: usize },
    #[error("{path}: field {index} ({token:?}) is not numeric")]
    NonNumericField {
        path: PathBuf,
        index: usize,
        token: String,
    },
    #[error("recording {id}: {flows} flow files vs {disps} disparity files (want disparity - 1){oxts_note}")]
    CountMismatch {
        id: String,
        flows: usize,
        disps: usize,
        oxts_note: String,
    },
    #[error("unknown recording id {0:?}")]
    UnknownId(String),
    #[error("{path}:{line}: {reason}")]
    BadManifest {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("manifest references missing directory {0}")]
    MissingDir(PathBuf),
    #[error(transparent)]
    Core(#[from] crate::error::CoreError),
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Decode a flow map in the requested format.
pub fn read_flow(path: &Path, format: FlowFormat) -> Result<FlowField, IngestError> {
    match format {
        FlowFormat::Flo => read_flo(path),
        FlowFormat::KittiPng => read_kitti_flow_png(path),
    }
}

/// Decode and scale a disparity map in the requested format.
pub fn read_disp(path: &Path, format: DispFormat, disp_scale: f64) -> Result<DisparityMap, IngestError> {
    read_disparity(path, format, disp_scale)
}

/// Regular files under `dir` with the given extension, sorted by filename.
pub(crate) fn sorted_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>, IngestError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let path = entry.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case(extension))
        {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
