//! KITTI 2015 benchmark flow PNGs: 16-bit RGB, `u = (R - 2^15)/64`,
//! `v = (G - 2^15)/64`, valid where `B > 0`.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Rgb};

use crate::field::FlowField;
use crate::ingest::IngestError;

const OFFSET: f64 = 32768.0;
const SCALE: f64 = 64.0;

/// Decode a KITTI flow PNG.
pub fn read_kitti_flow_png(path: &Path) -> Result<FlowField, IngestError> {
    let img = image::open(path).map_err(|e| IngestError::BadPng {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rgb = match img {
        DynamicImage::ImageRgb16(buf) => buf,
        other => {
            return Err(IngestError::WrongChannelCount {
                path: path.to_path_buf(),
                expected: "16-bit 3-channel PNG",
                got: format!("{:?}", other.color()),
            })
        }
    };
    let (width, height) = (rgb.width() as usize, rgb.height() as usize);
    let n = width * height;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for px in rgb.pixels() {
        let [r, g, b] = px.0;
        u.push((r as f64 - OFFSET) / SCALE);
        v.push((g as f64 - OFFSET) / SCALE);
        valid.push(b > 0);
    }
    Ok(FlowField::new(width, height, u, v, valid)?)
}

/// Encode a flow field in the KITTI PNG convention. Values are clamped to
/// the representable range (multiples of 1/64 within roughly +-512).
pub fn write_kitti_flow_png(f: &FlowField, path: &Path) -> Result<(), IngestError> {
    let encode = |x: f64| -> u16 { (x * SCALE + OFFSET).round().clamp(0.0, 65535.0) as u16 };
    let mut buf = ImageBuffer::<Rgb<u16>, Vec<u16>>::new(f.width() as u32, f.height() as u32);
    for (i, px) in buf.pixels_mut().enumerate() {
        *px = Rgb([
            encode(f.u()[i]),
            encode(f.v()[i]),
            if f.valid()[i] { 1 } else { 0 },
        ]);
    }
    DynamicImage::ImageRgb16(buf)
        .save(path)
        .map_err(|e| IngestError::BadPng {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}
