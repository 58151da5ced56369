//! KITTI oxts ground-truth records: one whitespace-separated text file per
//! frame with at least 30 numeric navigation fields.

use std::path::Path;

use crate::ingest::{io_err, sorted_files, IngestError};
use crate::recording::GroundTruthField;

/// Field count every oxts record must carry.
const MIN_FIELDS: usize = 30;
/// Index of `vn` (north velocity, m/s).
const IDX_VN: usize = 6;
/// Index of `ve` (east velocity, m/s).
const IDX_VE: usize = 7;
/// Index of `vf` (forward velocity, m/s).
const IDX_VF: usize = 8;

/// Per-frame forward speed (`vf`), in filename-sorted order.
pub fn read_oxts_speed(dir: &Path) -> Result<Vec<f64>, IngestError> {
    read_oxts_speed_with(dir, GroundTruthField::Forward)
}

/// Per-frame ground-truth speed using the selected oxts channel.
pub fn read_oxts_speed_with(
    dir: &Path,
    field: GroundTruthField,
) -> Result<Vec<f64>, IngestError> {
    let files = sorted_files(dir, "txt")?;
    if files.is_empty() {
        return Err(IngestError::MissingFrameFile(dir.to_path_buf()));
    }
    let mut speeds = Vec::with_capacity(files.len());
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() < MIN_FIELDS {
            return Err(IngestError::TooFewFields {
                path: path.clone(),
                got: tokens.len(),
            });
        }
        // validate the full fixed-layout prefix, not just the fields we use
        let mut parsed = Vec::with_capacity(MIN_FIELDS);
        for (index, token) in tokens.iter().take(MIN_FIELDS).enumerate() {
            match token.parse::<f64>() {
                Ok(v) => parsed.push(v),
                Err(_) => {
                    return Err(IngestError::NonNumericField {
                        path: path.clone(),
                        index,
                        token: token.to_string(),
                    })
                }
            }
        }
        let speed = match field {
            GroundTruthField::Forward => parsed[IDX_VF],
            GroundTruthField::HorizontalNorm => parsed[IDX_VN].hypot(parsed[IDX_VE]),
        };
        speeds.push(speed);
    }
    Ok(speeds)
}

/// Render one oxts record with `vf` (and `vn`) set to `speed`; the remaining
/// fields are zero. Used by the synthetic dataset writer.
pub fn oxts_record(speed: f64) -> String {
    let mut fields = vec!["0".to_string(); MIN_FIELDS];
    fields[IDX_VN] = format!("{speed:.9}");
    fields[IDX_VF] = format!("{speed:.9}");
    fields.join(" ")
}
