//! Fidelity metrics on the Y channel: PSNR and SSIM with the canonical
//! 11x11 sigma=1.5 Gaussian window. Accumulation is in f64 regardless of
//! the image scalar type.

use crate::error::{Error, Result};
use crate::image_rgb::{rgb_to_y, ImageRgb};
use crate::Float;

/// Metric pair for one image comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// dB; `f64::INFINITY` when the images are identical.
    pub psnr_y: f64,
    pub ssim_y: f64,
}

/// Peak signal-to-noise ratio on the Y planes with peak 1.0:
/// `10 * log10(1 / MSE)`. Identical images return `f64::INFINITY`.
pub fn psnr_y<S: Float>(a: &ImageRgb<S>, b: &ImageRgb<S>) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let ya = rgb_to_y(a);
    let yb = rgb_to_y(b);
    let n = ya.data.len() as f64;
    let mse = ya
        .data
        .iter()
        .zip(yb.data.iter())
        .map(|(&p, &q)| {
            let d = p.to_f64().unwrap_or(0.0) - q.to_f64().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0f64; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut total = 0.0;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        total += *v;
    }
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Mean local SSIM over all valid 11x11 window positions of the Y planes
/// (peak 1.0, K1 = 0.01, K2 = 0.03). Requires min dim >= 11.
pub fn ssim_y<S: Float>(a: &ImageRgb<S>, b: &ImageRgb<S>) -> Result<f64> {
    if !a.same_dims(b) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    let (h, w) = (a.height(), a.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::InvalidDims(format!(
            "ssim needs dims >= {SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let ya: Vec<f64> = rgb_to_y(a)
        .data
        .iter()
        .map(|v| v.to_f64().unwrap_or(0.0))
        .collect();
    let yb: Vec<f64> = rgb_to_y(b)
        .data
        .iter()
        .map(|v| v.to_f64().unwrap_or(0.0))
        .collect();
    let win = gaussian_window();

    // separable weighted moments: horizontal pass then vertical
    let out_w = w - SSIM_WINDOW + 1;
    let out_h = h - SSIM_WINDOW + 1;
    let hpass = |src: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut mid = vec![0.0f64; h * out_w];
        for y in 0..h {
            for ox in 0..out_w {
                let mut acc = 0.0;
                for (k, wk) in win.iter().enumerate() {
                    acc += wk * src(y * w + ox + k);
                }
                mid[y * out_w + ox] = acc;
            }
        }
        mid
    };
    let vpass = |mid: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0f64; out_h * out_w];
        for oy in 0..out_h {
            for x in 0..out_w {
                let mut acc = 0.0;
                for (k, wk) in win.iter().enumerate() {
                    acc += wk * mid[(oy + k) * out_w + x];
                }
                out[oy * out_w + x] = acc;
            }
        }
        out
    };
    let filt = |vals: &dyn Fn(usize) -> f64| vpass(&hpass(vals));

    let mu_a = filt(&|i| ya[i]);
    let mu_b = filt(&|i| yb[i]);
    let aa = filt(&|i| ya[i] * ya[i]);
    let bb = filt(&|i| yb[i] * yb[i]);
    let ab = filt(&|i| ya[i] * yb[i]);

    let mut total = 0.0;
    for i in 0..out_h * out_w {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
        total += num / den;
    }
    Ok(total / (out_h * out_w) as f64)
}

/// Convenience pairing of both metrics.
pub fn metric_report<S: Float>(a: &ImageRgb<S>, b: &ImageRgb<S>) -> Result<MetricReport> {
    Ok(MetricReport {
        psnr_y: psnr_y(a, b)?,
        ssim_y: ssim_y(a, b)?,
    })
}
