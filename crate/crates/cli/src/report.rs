//! Report emission: results.csv, the per-variant mean table, and the
//! red-tinted artifact overlays.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;

use sargd_core::{BinaryMask, ImageRgb};

use crate::experiment::RunRecord;

/// Write `results.csv` with the fixed header
/// `image,scale,variant,psnr_y,ssim_y,wall_ms,seed`.
pub fn write_results_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut text = String::from("image,scale,variant,psnr_y,ssim_y,wall_ms,seed\n");
    for r in records {
        text.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{}\n",
            r.image, r.scale, r.variant, r.psnr_y, r.ssim_y, r.wall_ms, r.seed
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Mean PSNR/SSIM per (variant, scale), keyed in deterministic order.
pub fn variant_means(records: &[RunRecord]) -> BTreeMap<(String, u32), (f64, f64, usize)> {
    let mut acc: BTreeMap<(String, u32), (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        let e = acc
            .entry((r.variant.clone(), r.scale))
            .or_insert((0.0, 0.0, 0));
        e.0 += r.psnr_y;
        e.1 += r.ssim_y;
        e.2 += 1;
    }
    for v in acc.values_mut() {
        v.0 /= v.2 as f64;
        v.1 /= v.2 as f64;
    }
    acc
}

/// Write the markdown mean table.
pub fn write_summary_md(path: &Path, records: &[RunRecord]) -> Result<()> {
    let means = variant_means(records);
    let mut text = String::from("# Experiment summary\n\n");
    text.push_str("| variant | scale | mean PSNR-Y (dB) | mean SSIM-Y | runs |\n");
    text.push_str("|---|---|---|---|---|\n");
    for ((variant, scale), (psnr, ssim, n)) in &means {
        text.push_str(&format!(
            "| {variant} | x{scale} | {psnr:.4} | {ssim:.5} | {n} |\n"
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Tint artifact pixels red over the output image (50/50 blend), with the
/// latent-scale mask broadcast by nearest neighbor.
pub fn tint_overlay(image: &ImageRgb<f32>, mask: &BinaryMask) -> ImageRgb<f32> {
    let ry = (image.height() / mask.height()).max(1);
    let rx = (image.width() / mask.width()).max(1);
    ImageRgb::from_fn(image.height(), image.width(), |y, x| {
        let p = image.get(y, x);
        if mask.get(
            (y / ry).min(mask.height() - 1),
            (x / rx).min(mask.width() - 1),
        ) == 1
        {
            [0.5 * p[0] + 0.5, 0.5 * p[1], 0.5 * p[2]]
        } else {
            p
        }
    })
}
