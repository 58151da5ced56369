//! Dataset manifest: a flat key-value file, one section per recording.
//!
//! ```text
//! # comments and blank lines are ignored
//! root = /data/kitti            # optional, defaults to the manifest's directory
//! flow_format = flo             # flo | kitti_png
//! disp_format = pfm             # pfm | png16 | float_raw
//! disp_scale = 1.0              # optional multiplier, > 0
//! gt_field = vf                 # vf | horizontal_norm
//!
//! [2011_09_26_drive_0001]
//! flow_dir = flow/0001
//! disp_dir = disp/0001
//! oxts_dir = oxts/0001          # optional; omit when no ground truth exists
//! ```
//!
//! Relative directories resolve against `root`. Every referenced directory
//! must exist when the manifest is loaded.

use std::path::{Path, PathBuf};

use crate::ingest::{read_oxts_speed_with, sorted_files, IngestError};
use crate::recording::{DispFormat, FlowFormat, GroundTruthField, Recording};

/// One recording's directories, already resolved against the manifest root.
#[derive(Debug, Clone)]
pub struct RecordingEntry {
    pub id: String,
    pub flow_dir: PathBuf,
    pub disp_dir: PathBuf,
    pub oxts_dir: Option<PathBuf>,
}

/// Parsed dataset manifest.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub flow_format: FlowFormat,
    pub disp_format: DispFormat,
    pub disp_scale: f64,
    pub gt_field: GroundTruthField,
    pub recordings: Vec<RecordingEntry>,
}

impl DatasetManifest {
    /// Parse and validate a manifest file.
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::ingest::io_err(path, e))?;
        let default_root = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self::parse(&text, path, default_root)
    }

    fn parse(text: &str, origin: &Path, default_root: PathBuf) -> Result<Self, IngestError> {
        let err = |line: usize, reason: String| IngestError::BadManifest {
            path: origin.to_path_buf(),
            line,
            reason,
        };

        let mut root: Option<PathBuf> = None;
        let mut flow_format: Option<FlowFormat> = None;
        let mut disp_format: Option<DispFormat> = None;
        let mut disp_scale = 1.0f64;
        let mut gt_field = GroundTruthField::default();

        struct Section {
            line: usize,
            id: String,
            flow_dir: Option<PathBuf>,
            disp_dir: Option<PathBuf>,
            oxts_dir: Option<PathBuf>,
        }
        let mut sections: Vec<Section> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let id = inner
                    .strip_suffix(']')
                    .ok_or_else(|| err(lineno, "unterminated section header".into()))?
                    .trim();
                if id.is_empty() {
                    return Err(err(lineno, "empty recording id".into()));
                }
                if sections.iter().any(|s| s.id == id) {
                    return Err(err(lineno, format!("duplicate recording id {id:?}")));
                }
                sections.push(Section {
                    line: lineno,
                    id: id.to_string(),
                    flow_dir: None,
                    disp_dir: None,
                    oxts_dir: None,
                });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(lineno, format!("empty value for {key}")));
            }
            match sections.last_mut() {
                None => match key {
                    "root" => root = Some(PathBuf::from(value)),
                    "flow_format" => {
                        flow_format = Some(match value {
                            "flo" => FlowFormat::Flo,
                            "kitti_png" => FlowFormat::KittiPng,
                            other => {
                                return Err(err(lineno, format!("unknown flow_format {other:?}")))
                            }
                        })
                    }
                    "disp_format" => {
                        disp_format = Some(match value {
                            "pfm" => DispFormat::Pfm,
                            "png16" => DispFormat::Png16,
                            "float_raw" => DispFormat::FloatRaw,
                            other => {
                                return Err(err(lineno, format!("unknown disp_format {other:?}")))
                            }
                        })
                    }
                    "disp_scale" => {
                        disp_scale = value
                            .parse()
                            .map_err(|_| err(lineno, format!("bad disp_scale {value:?}")))?
                    }
                    "gt_field" => {
                        gt_field = match value {
                            "vf" => GroundTruthField::Forward,
                            "horizontal_norm" => GroundTruthField::HorizontalNorm,
                            other => {
                                return Err(err(lineno, format!("unknown gt_field {other:?}")))
                            }
                        }
                    }
                    other => return Err(err(lineno, format!("unknown global key {other:?}"))),
                },
                Some(section) => match key {
                    "flow_dir" => section.flow_dir = Some(PathBuf::from(value)),
                    "disp_dir" => section.disp_dir = Some(PathBuf::from(value)),
                    "oxts_dir" => section.oxts_dir = Some(PathBuf::from(value)),
                    other => return Err(err(lineno, format!("unknown recording key {other:?}"))),
                },
            }
        }

        let root = root.unwrap_or(default_root);
        let flow_format =
            flow_format.ok_or_else(|| err(0, "missing global key flow_format".into()))?;
        let disp_format =
            disp_format.ok_or_else(|| err(0, "missing global key disp_format".into()))?;
        if !disp_scale.is_finite() || disp_scale <= 0.0 {
            return Err(err(0, format!("disp_scale must be > 0, got {disp_scale}")));
        }

        let resolve = |p: PathBuf| if p.is_absolute() { p } else { root.join(p) };
        let mut recordings = Vec::with_capacity(sections.len());
        for s in sections {
            let flow_dir = resolve(
                s.flow_dir
                    .ok_or_else(|| err(s.line, format!("[{}] missing flow_dir", s.id)))?,
            );
            let disp_dir = resolve(
                s.disp_dir
                    .ok_or_else(|| err(s.line, format!("[{}] missing disp_dir", s.id)))?,
            );
            let oxts_dir = s.oxts_dir.map(resolve);
            for dir in [&flow_dir, &disp_dir].into_iter().chain(oxts_dir.iter()) {
                if !dir.is_dir() {
                    return Err(IngestError::MissingDir(dir.clone()));
                }
            }
            recordings.push(RecordingEntry {
                id: s.id,
                flow_dir,
                disp_dir,
                oxts_dir,
            });
        }

        Ok(Self {
            root,
            flow_format,
            disp_format,
            disp_scale,
            gt_field,
            recordings,
        })
    }

    /// Resolve one recording, listing its files and reading ground truth.
    /// Counts must agree: flow files = disparity files - 1 = oxts files - 1.
    pub fn load_recording(&self, id: &str) -> Result<Recording, IngestError> {
        let entry = self
            .recordings
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| IngestError::UnknownId(id.to_string()))?;

        let flow_paths = sorted_files(&entry.flow_dir, self.flow_format.extension())?;
        let disp_paths = sorted_files(&entry.disp_dir, self.disp_format.extension())?;
        let ground_truth = entry
            .oxts_dir
            .as_ref()
            .map(|dir| read_oxts_speed_with(dir, self.gt_field))
            .transpose()?;

        let gt_len = ground_truth.as_ref().map(Vec::len);
        if disp_paths.is_empty()
            || flow_paths.len() + 1 != disp_paths.len()
            || gt_len.is_some_and(|n| n != disp_paths.len())
        {
            let oxts_note = match gt_len {
                Some(n) => format!(", {n} oxts files (want disparity count)"),
                None => String::new(),
            };
            return Err(IngestError::CountMismatch {
                id: id.to_string(),
                flows: flow_paths.len(),
                disps: disp_paths.len(),
                oxts_note,
            });
        }

        Ok(Recording::new(
            id,
            flow_paths,
            disp_paths,
            ground_truth,
            self.flow_format,
            self.disp_format,
            self.disp_scale,
        )?)
    }

    /// Load every recording in manifest order.
    pub fn load_all(&self) -> Result<Vec<Recording>, IngestError> {
        self.recordings
            .iter()
            .map(|e| self.load_recording(&e.id))
            .collect()
    }
}

/// Render a manifest for recordings laid out as `<id>/{flow,disp,oxts}`
/// under the manifest's own directory. Used by the synthetic generator.
pub fn render_manifest(
    ids: &[String],
    flow_format: FlowFormat,
    disp_format: DispFormat,
    with_oxts: bool,
) -> String {
    let flow = match flow_format {
        FlowFormat::Flo => "flo",
        FlowFormat::KittiPng => "kitti_png",
    };
    let disp = match disp_format {
        DispFormat::Pfm => "pfm",
        DispFormat::Png16 => "png16",
        DispFormat::FloatRaw => "float_raw",
    };
    let mut out = String::new();
    out.push_str(&format!("flow_format = {flow}\ndisp_format = {disp}\n"));
    for id in ids {
        out.push_str(&format!("\n[{id}]\nflow_dir = {id}/flow\ndisp_dir = {id}/disp\n"));
        if with_oxts {
            out.push_str(&format!("oxts_dir = {id}/oxts\n"));
        }
    }
    out
}
