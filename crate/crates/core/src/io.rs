//! File interfaces: 8-bit RGB PNG, bit-exact mask PNG, the raw latent
//! debug dump, and trace CSV.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::LatentGrid;
use crate::image_rgb::ImageRgb;
use crate::mask::BinaryMask;
use crate::sampler::Trace;
use crate::Float;

/// Read an 8-bit RGB PNG; pixel values map to `[0, 1]` by `/255`.
pub fn read_png_rgb<S: Float>(path: &Path) -> Result<ImageRgb<S>> {
    let img = image::open(path)
        .map_err(|e| Error::ImageFile(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let inv = S::from_f64_lossy(1.0 / 255.0);
    let pixels: Vec<S> = img
        .as_raw()
        .iter()
        .map(|&b| S::from_u8(b).unwrap_or_else(S::zero) * inv)
        .collect();
    ImageRgb::new(h, w, pixels)
}

/// Write an 8-bit RGB PNG; values map by `round(255 * v)`.
pub fn write_png_rgb<S: Float>(path: &Path, image: &ImageRgb<S>) -> Result<()> {
    let bytes: Vec<u8> = image
        .pixels()
        .iter()
        .map(|v| {
            (v.to_f64().unwrap_or(0.0) * 255.0)
                .round()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    let buf = image::RgbImage::from_raw(image.width() as u32, image.height() as u32, bytes)
        .ok_or_else(|| Error::ImageFile("buffer size mismatch".into()))?;
    buf.save(path)
        .map_err(|e| Error::ImageFile(format!("{}: {e}", path.display())))
}

/// Write a mask as grayscale PNG with `{0 -> 0, 1 -> 255}`.
pub fn write_mask_png(path: &Path, mask: &BinaryMask) -> Result<()> {
    let bytes: Vec<u8> = mask.bits().iter().map(|&b| b * 255).collect();
    let buf = image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes)
        .ok_or_else(|| Error::ImageFile("buffer size mismatch".into()))?;
    buf.save(path)
        .map_err(|e| Error::ImageFile(format!("{}: {e}", path.display())))
}

/// Read a `{0, 255}` grayscale PNG back into a mask.
pub fn read_mask_png(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path)
        .map_err(|e| Error::ImageFile(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let bits: Vec<u8> = img.as_raw().iter().map(|&b| (b >= 128) as u8).collect();
    BinaryMask::new(h, w, bits)
}

/// Debug dump: a 3x32-bit little-endian dims header (C, H, W) followed by
/// the grid as little-endian f32.
pub fn write_latent_dump<S: Float>(path: &Path, grid: &LatentGrid<S>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let (c, h, w) = grid.shape();
    for dim in [c, h, w] {
        f.write_all(&(dim as u32).to_le_bytes())?;
    }
    for v in grid.data() {
        f.write_all(&(v.to_f64().unwrap_or(0.0) as f32).to_le_bytes())?;
    }
    Ok(())
}

/// Read a latent debug dump back (always f32 precision).
pub fn read_latent_dump(path: &Path) -> Result<LatentGrid<f32>> {
    let mut f = std::fs::File::open(path)?;
    let mut header = [0u8; 12];
    f.read_exact(&mut header)?;
    let c = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut raw = Vec::new();
    f.read_to_end(&mut raw)?;
    if raw.len() != 4 * c * h * w {
        return Err(Error::ShapeMismatch(format!(
            "dump payload {} bytes != 4*{c}*{h}*{w}",
            raw.len()
        )));
    }
    let data: Vec<f32> = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    LatentGrid::new(c, h, w, data)
}

/// Serialize a trace as CSV with header
/// `t,s_r,artifact_fraction,rgr_applied,sag_updated`.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::from("t,s_r,artifact_fraction,rgr_applied,sag_updated\n");
    for r in &trace.steps {
        out.push_str(&format!(
            "{},{:.9},{:.9},{},{}\n",
            r.t, r.s_r, r.artifact_fraction, r.rgr_applied as u8, r.sag_updated as u8
        ));
    }
    out
}

/// Write a trace CSV to disk.
pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_exact_at_8_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        // values on the 8-bit lattice survive the round trip exactly
        let img = ImageRgb::from_fn(5, 7, |y, x| {
            [
                ((y * 37 + x) % 256) as f64 / 255.0,
                ((x * 91) % 256) as f64 / 255.0,
                ((y * 13 + 7) % 256) as f64 / 255.0,
            ]
        });
        write_png_rgb(&path, &img).unwrap();
        let back: ImageRgb<f64> = read_png_rgb(&path).unwrap();
        assert!(back.same_dims(&img));
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mask_png_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mask = BinaryMask::from_fn(9, 6, |y, x| (y * x) % 3 == 1);
        write_mask_png(&path, &mask).unwrap();
        let back = read_mask_png(&path).unwrap();
        assert_eq!(back, mask);
    }

    #[test]
    fn latent_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("latent.bin");
        let grid = LatentGrid::from_fn(2, 3, 4, |c, y, x| {
            (c as f32) - 0.5 + 0.1 * (y * 4 + x) as f32
        });
        write_latent_dump(&path, &grid).unwrap();
        let back = read_latent_dump(&path).unwrap();
        assert_eq!(back, grid);
    }
}
