//! Per-frame speed traces.

use crate::error::CoreError;

/// Ordered per-frame scalar speeds for one recording.
///
/// Entries are `None` where a frame produced no valid pixels; zero is a legal
/// speed and is never conflated with "no data". Values are image-domain
/// units before scaling and m/s after [`crate::calibrate::apply_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSeries {
    recording_id: String,
    frame_index_offset: usize,
    values: Vec<Option<f64>>,
}

impl SpeedSeries {
    /// Build a series; present values must be finite and non-negative.
    pub fn new(
        recording_id: impl Into<String>,
        frame_index_offset: usize,
        values: Vec<Option<f64>>,
    ) -> Result<Self, CoreError> {
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                if !v.is_finite() || *v < 0.0 {
                    return Err(CoreError::InvalidSeriesValue {
                        index: frame_index_offset + i,
                        value: *v,
                    });
                }
            }
        }
        Ok(Self {
            recording_id: recording_id.into(),
            frame_index_offset,
            values,
        })
    }

    pub fn recording_id(&self) -> &str {
        &self.recording_id
    }

    pub fn frame_index_offset(&self) -> usize {
        self.frame_index_offset
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at local index `i` (not frame index); `None` when missing.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied().flatten()
    }

    /// Frame index of local entry `i`.
    pub fn frame_index(&self, i: usize) -> usize {
        self.frame_index_offset + i
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Same metadata, new values. Used by smoothing and scaling stages.
    pub fn with_values(&self, values: Vec<Option<f64>>) -> Result<Self, CoreError> {
        Self::new(self.recording_id.clone(), self.frame_index_offset, values)
    }
}
