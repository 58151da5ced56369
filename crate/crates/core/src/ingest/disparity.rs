//! Disparity/depth map decoding: PFM, 16-bit PNG, and raw float maps.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::field::DisparityMap;
use crate::ingest::{io_err, IngestError};
use crate::recording::DispFormat;

/// Decode `path` in the given format and multiply samples by `disp_scale`.
///
/// Negative samples (possible in PFM) are marked invalid rather than
/// rejected; PNG16 zeros follow the KITTI sparse convention and are invalid.
pub fn read_disparity(
    path: &Path,
    format: DispFormat,
    disp_scale: f64,
) -> Result<DisparityMap, IngestError> {
    match format {
        DispFormat::Pfm => {
            let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
            decode_pfm(&bytes, path, disp_scale)
        }
        DispFormat::Png16 => read_png16(path, disp_scale),
        DispFormat::FloatRaw => read_float_raw(path, disp_scale),
    }
}

/// Decode a grayscale `Pf` PFM buffer. The header scale's sign selects the
/// endianness (negative = little); its magnitude is ignored, matching common
/// PFM readers. Rows are stored bottom-to-top and flipped here.
pub fn decode_pfm(bytes: &[u8], origin: &Path, disp_scale: f64) -> Result<DisparityMap, IngestError> {
    let bad = |reason: String| IngestError::BadHeader {
        path: origin.to_path_buf(),
        reason,
    };

    let mut pos = 0usize;
    let mut token = |bytes: &[u8]| -> Result<String, IngestError> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = token(bytes)?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => return Err(bad("color PFM (PF) not supported, expected grayscale Pf".into())),
        other => return Err(bad(format!("bad magic {other:?}, expected Pf"))),
    }
    let width: usize = token(bytes)?
        .parse()
        .map_err(|_| bad("width is not an integer".into()))?;
    let height: usize = token(bytes)?
        .parse()
        .map_err(|_| bad("height is not an integer".into()))?;
    let scale: f32 = token(bytes)?
        .parse()
        .map_err(|_| bad("scale is not a float".into()))?;
    if scale == 0.0 {
        return Err(bad("scale must be non-zero".into()));
    }
    let little_endian = scale < 0.0;
    // exactly one whitespace byte separates the header from the samples
    pos += 1;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    let needed = pos + n * 4;
    if bytes.len() < needed {
        return Err(IngestError::TruncatedFile {
            path: origin.to_path_buf(),
            needed,
            got: bytes.len(),
        });
    }
    if width == 0 || height == 0 {
        return Err(bad(format!("empty extent {width}x{height}")));
    }

    let mut data = vec![0.0f64; n];
    for row in 0..height {
        // PFM rows run bottom-to-top
        let dst_y = height - 1 - row;
        for x in 0..width {
            let off = pos + (row * width + x) * 4;
            let raw: [u8; 4] = bytes[off..off + 4].try_into().unwrap();
            let val = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            data[dst_y * width + x] = val as f64 * disp_scale;
        }
    }
    // negative and non-finite samples are demoted to invalid by construction
    Ok(DisparityMap::new(width, height, data, vec![true; n])?)
}

/// Write a disparity map as little-endian grayscale PFM. Invalid pixels are
/// written as -1 so they decode back to invalid.
pub fn write_pfm(d: &DisparityMap, path: &Path) -> Result<(), IngestError> {
    let (w, h) = (d.width(), d.height());
    let mut out = Vec::with_capacity(32 + w * h * 4);
    out.extend_from_slice(format!("Pf\n{w} {h}\n-1.0\n").as_bytes());
    for row in 0..h {
        let src_y = h - 1 - row;
        for x in 0..w {
            let i = src_y * w + x;
            let val = if d.valid()[i] { d.d()[i] as f32 } else { -1.0 };
            out.extend_from_slice(&val.to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

fn read_png16(path: &Path, disp_scale: f64) -> Result<DisparityMap, IngestError> {
    let img = image::open(path).map_err(|e| IngestError::BadPng {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let gray = match img {
        DynamicImage::ImageLuma16(buf) => buf,
        other => {
            return Err(IngestError::WrongChannelCount {
                path: path.to_path_buf(),
                expected: "16-bit single-channel PNG",
                got: format!("{:?}", other.color()),
            })
        }
    };
    let (width, height) = (gray.width() as usize, gray.height() as usize);
    let n = width * height;
    let mut data = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for px in gray.pixels() {
        let raw = px.0[0];
        data.push(raw as f64 / 256.0 * disp_scale);
        valid.push(raw > 0);
    }
    Ok(DisparityMap::new(width, height, data, valid)?)
}

/// Write a 16-bit single-channel disparity PNG (value = d * 256 / disp_scale,
/// clamped; invalid pixels become 0).
pub fn write_png16(d: &DisparityMap, path: &Path, disp_scale: f64) -> Result<(), IngestError> {
    let mut buf = ImageBuffer::<Luma<u16>, Vec<u16>>::new(d.width() as u32, d.height() as u32);
    for (i, px) in buf.pixels_mut().enumerate() {
        let raw = if d.valid()[i] {
            (d.d()[i] * 256.0 / disp_scale).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        *px = Luma([raw]);
    }
    DynamicImage::ImageLuma16(buf)
        .save(path)
        .map_err(|e| IngestError::BadPng {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

fn read_float_raw(path: &Path, disp_scale: f64) -> Result<DisparityMap, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 8 {
        return Err(IngestError::TruncatedFile {
            path: path.to_path_buf(),
            needed: 8,
            got: bytes.len(),
        });
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if width == 0 || height == 0 {
        return Err(IngestError::BadHeader {
            path: path.to_path_buf(),
            reason: format!("empty extent {width}x{height}"),
        });
    }
    let n = width * height;
    let needed = 8 + n * 4;
    if bytes.len() < needed {
        return Err(IngestError::TruncatedFile {
            path: path.to_path_buf(),
            needed,
            got: bytes.len(),
        });
    }
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let off = 8 + i * 4;
        let val = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        data.push(val as f64 * disp_scale);
    }
    Ok(DisparityMap::new(width, height, data, vec![true; n])?)
}

/// Write a raw float map: little-endian u32 width/height header, then
/// row-major little-endian f32 samples. Invalid pixels become NaN.
pub fn write_float_raw(d: &DisparityMap, path: &Path) -> Result<(), IngestError> {
    let n = d.width() * d.height();
    let mut out = Vec::with_capacity(8 + n * 4);
    out.extend_from_slice(&(d.width() as u32).to_le_bytes());
    out.extend_from_slice(&(d.height() as u32).to_le_bytes());
    for i in 0..n {
        let val = if d.valid()[i] { d.d()[i] as f32 } else { f32::NAN };
        out.extend_from_slice(&val.to_le_bytes());
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}
