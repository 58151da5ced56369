//! Middlebury `.flo` optical-flow files.
//!
//! Layout: 4-byte float magic 202021.25, little-endian i32 width and height,
//! then `height * width` interleaved `(u, v)` little-endian f32 pairs in
//! row-major order. Samples with magnitude above 1e9 (or non-finite) mark
//! unknown flow; writers emit 1e10 for them.

use std::path::Path;

use crate::field::FlowField;
use crate::ingest::{io_err, IngestError};

const FLO_MAGIC: f32 = 202021.25;
/// Samples at or beyond this magnitude are unknown-flow sentinels.
const INVALID_LIMIT: f32 = 1e9;
/// Sentinel written for invalid pixels.
const INVALID_SENTINEL: f32 = 1e10;

/// Decode a `.flo` byte buffer.
pub fn decode_flo(bytes: &[u8], origin: &Path) -> Result<FlowField, IngestError> {
    let need_header = 12;
    if bytes.len() < need_header {
        return Err(IngestError::TruncatedFile {
            path: origin.to_path_buf(),
            needed: need_header,
            got: bytes.len(),
        });
    }
    let magic = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        return Err(IngestError::BadMagic {
            path: origin.to_path_buf(),
            got: magic,
        });
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(IngestError::BadHeader {
            path: origin.to_path_buf(),
            reason: format!("non-positive dimensions {width}x{height}"),
        });
    }
    let (width, height) = (width as usize, height as usize);
    let needed = need_header + width * height * 8;
    if bytes.len() < needed {
        return Err(IngestError::TruncatedFile {
            path: origin.to_path_buf(),
            needed,
            got: bytes.len(),
        });
    }

    let n = width * height;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for i in 0..n {
        let off = need_header + i * 8;
        let ui = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let vi = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
        let ok = ui.is_finite() && vi.is_finite() && ui.abs() <= INVALID_LIMIT && vi.abs() <= INVALID_LIMIT;
        u.push(ui as f64);
        v.push(vi as f64);
        valid.push(ok);
    }
    Ok(FlowField::new(width, height, u, v, valid)?)
}

/// Encode a flow field as `.flo` bytes; invalid pixels become the 1e10 sentinel.
pub fn encode_flo(f: &FlowField) -> Vec<u8> {
    let n = f.width() * f.height();
    let mut out = Vec::with_capacity(12 + n * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(f.width() as i32).to_le_bytes());
    out.extend_from_slice(&(f.height() as i32).to_le_bytes());
    for i in 0..n {
        let (u, v) = if f.valid()[i] {
            (f.u()[i] as f32, f.v()[i] as f32)
        } else {
            (INVALID_SENTINEL, INVALID_SENTINEL)
        };
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Read a `.flo` file from disk.
pub fn read_flo(path: &Path) -> Result<FlowField, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    decode_flo(&bytes, path)
}

/// Write a flow field as a `.flo` file.
pub fn write_flo(f: &FlowField, path: &Path) -> Result<(), IngestError> {
    std::fs::write(path, encode_flo(f)).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flo_bytes(width: i32, height: i32, uv: &[(f32, f32)]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
        out.extend_from_slice(&width.to_le_bytes());
        out.extend_from_slice(&height.to_le_bytes());
        for &(u, v) in uv {
            out.extend_from_slice(&u.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    #[test]
    fn decodes_hand_built_2x1() {
        let bytes = flo_bytes(2, 1, &[(1.0, 0.0), (0.0, 1.0)]);
        let f = decode_flo(&bytes, Path::new("mem")).unwrap();
        assert_eq!((f.width(), f.height()), (2, 1));
        assert_eq!(f.u(), &[1.0, 0.0]);
        assert_eq!(f.v(), &[0.0, 1.0]);
        assert_eq!(f.valid(), &[true, true]);
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = flo_bytes(1, 1, &[(0.0, 0.0)]);
        bytes[0..4].copy_from_slice(&0.0f32.to_le_bytes());
        let err = decode_flo(&bytes, Path::new("mem")).unwrap_err();
        assert!(matches!(err, IngestError::BadMagic { .. }));
    }

    #[test]
    fn rejects_truncated_payload() {
        let mut bytes = flo_bytes(2, 2, &[(0.0, 0.0); 4]);
        bytes.truncate(20);
        let err = decode_flo(&bytes, Path::new("mem")).unwrap_err();
        assert!(matches!(err, IngestError::TruncatedFile { .. }));
    }

    #[test]
    fn sentinel_pixels_are_invalid() {
        let bytes = flo_bytes(2, 1, &[(1e10, 0.0), (0.5, -0.5)]);
        let f = decode_flo(&bytes, Path::new("mem")).unwrap();
        assert_eq!(f.valid(), &[false, true]);
    }

    #[test]
    fn one_pixel_zero_field_is_20_bytes() {
        let f = FlowField::uniform(1, 1, 0.0, 0.0);
        assert_eq!(encode_flo(&f).len(), 20);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.flo");
        let f = FlowField::dense(3, 2, vec![0.5; 6], vec![-1.5; 6]).unwrap();
        write_flo(&f, &path).unwrap();
        let g = read_flo(&path).unwrap();
        assert_eq!(f, g);
    }
}
