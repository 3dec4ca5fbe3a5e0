//! Deterministic synthetic test corpus: gradients, checkerboards and
//! Gaussian-blob textures at 64-128 px, so nothing has to be downloaded.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use sargd_core::{io, splitmix64, ImageRgb, RngStream};

/// Side lengths used by the generator; all divisible by 2, 3 and 4 so
/// every scale degrades without cropping.
const SIZES: [usize; 3] = [72, 96, 120];

fn gradient_image(rng: &mut RngStream, size: usize) -> ImageRgb<f32> {
    let theta = rng.next_uniform() * std::f64::consts::TAU;
    let (dy, dx) = (theta.sin(), theta.cos());
    let lo = 0.05 + 0.3 * rng.next_uniform();
    let hi = 0.65 + 0.3 * rng.next_uniform();
    let tint = [
        0.9 + 0.1 * rng.next_uniform(),
        0.9 + 0.1 * rng.next_uniform(),
        0.9 + 0.1 * rng.next_uniform(),
    ];
    let diag = size as f64 * (dy.abs() + dx.abs()).max(1e-9);
    ImageRgb::from_fn(size, size, |y, x| {
        let t = ((y as f64 * dy + x as f64 * dx) / diag + 0.5).clamp(0.0, 1.0);
        let v = lo + (hi - lo) * t;
        [
            (v * tint[0]) as f32,
            (v * tint[1]) as f32,
            (v * tint[2]) as f32,
        ]
    })
}

fn checker_image(rng: &mut RngStream, size: usize) -> ImageRgb<f32> {
    let cell = rng.next_range(2, 6) as usize;
    let a = [
        (0.05 + 0.25 * rng.next_uniform()) as f32,
        (0.05 + 0.25 * rng.next_uniform()) as f32,
        (0.05 + 0.25 * rng.next_uniform()) as f32,
    ];
    let b = [
        (0.7 + 0.25 * rng.next_uniform()) as f32,
        (0.7 + 0.25 * rng.next_uniform()) as f32,
        (0.7 + 0.25 * rng.next_uniform()) as f32,
    ];
    ImageRgb::from_fn(size, size, |y, x| {
        if ((y / cell) + (x / cell)).is_multiple_of(2) {
            a
        } else {
            b
        }
    })
}

fn blob_image(rng: &mut RngStream, size: usize) -> ImageRgb<f32> {
    let base = 0.3 + 0.4 * rng.next_uniform();
    let count = rng.next_range(10, 18) as usize;
    let mut blobs = Vec::with_capacity(count);
    for _ in 0..count {
        let cy = rng.next_uniform() * size as f64;
        let cx = rng.next_uniform() * size as f64;
        let sigma = 2.0 + 9.0 * rng.next_uniform();
        let amp = [
            0.8 * (rng.next_uniform() - 0.5),
            0.8 * (rng.next_uniform() - 0.5),
            0.8 * (rng.next_uniform() - 0.5),
        ];
        blobs.push((cy, cx, sigma, amp));
    }
    ImageRgb::from_fn(size, size, |y, x| {
        let mut v = [base, base, base];
        for (cy, cx, sigma, amp) in &blobs {
            let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
            let g = (-d2 / (2.0 * sigma * sigma)).exp();
            for c in 0..3 {
                v[c] += amp[c] * g;
            }
        }
        [v[0] as f32, v[1] as f32, v[2] as f32]
    })
}

/// Generate `n` images under `out_dir` as `img_###.png`, deterministically
/// from `seed`. Returns the written paths in index order.
pub fn gen_corpus(out_dir: &Path, n: usize, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut paths = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = RngStream::new(splitmix64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9)), 9);
        let size = SIZES[rng.next_range(0, (SIZES.len() - 1) as u64) as usize];
        let img = match i % 3 {
            0 => checker_image(&mut rng, size),
            1 => blob_image(&mut rng, size),
            _ => gradient_image(&mut rng, size),
        };
        let path = out_dir.join(format!("img_{i:03}.png"));
        io::write_png_rgb(&path, &img).with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}
