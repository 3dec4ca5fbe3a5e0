//! Artifact detectors: the ground-truth oracle and a patch-statistics
//! divergence heuristic, plus the reality-mask complement.

use crate::denoiser::{oracle_artifact_mask, ArtifactSpec};
use crate::error::{Error, Result};
use crate::image_rgb::{rgb_to_y, ImageRgb, Plane};
use crate::mask::BinaryMask;
use crate::Float;

/// Pluggable artifact detector.
#[derive(Debug, Clone)]
pub enum DetectorSpec<S> {
    /// Knows the injected ground truth; returns its region regardless of
    /// the images.
    Oracle {
        truth: ArtifactSpec<S>,
        latent_h: usize,
        latent_w: usize,
    },
    /// Flags pixels whose local patch statistics diverge from the
    /// reference: `|d_mean| + |d_std| > threshold` on the Y plane.
    StatDivergence { patch: usize, threshold: f64 },
    /// Detection disabled (direct-sum ablation).
    None,
}

impl<S: Float> DetectorSpec<S> {
    pub fn oracle(truth: ArtifactSpec<S>, latent_h: usize, latent_w: usize) -> Self {
        DetectorSpec::Oracle {
            truth,
            latent_h,
            latent_w,
        }
    }

    pub fn stat_divergence(patch: usize, threshold: f64) -> Result<Self> {
        if patch < 3 || patch.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "patch must be odd and >= 3, got {patch}"
            )));
        }
        if threshold <= 0.0 {
            return Err(Error::InvalidConfig("threshold must be > 0".into()));
        }
        Ok(DetectorSpec::StatDivergence { patch, threshold })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, DetectorSpec::None)
    }
}

/// Per-pixel local mean and standard deviation over a centered
/// `patch x patch` window, shrunk at the borders to the valid region.
/// Computed via summed-area tables.
fn patch_stats<S: Float>(plane: &Plane<S>, patch: usize) -> (Vec<f64>, Vec<f64>) {
    let (h, w) = (plane.height, plane.width);
    let r = patch / 2;
    // integral tables with a zero row/column prefix
    let mut sum = vec![0.0f64; (h + 1) * (w + 1)];
    let mut sq = vec![0.0f64; (h + 1) * (w + 1)];
    for y in 0..h {
        for x in 0..w {
            let v = plane.get(y, x).to_f64().unwrap_or(0.0);
            let i = (y + 1) * (w + 1) + (x + 1);
            sum[i] = v + sum[i - 1] + sum[i - (w + 1)] - sum[i - (w + 1) - 1];
            sq[i] = v * v + sq[i - 1] + sq[i - (w + 1)] - sq[i - (w + 1) - 1];
        }
    }
    let rect = |tab: &[f64], y0: usize, x0: usize, y1: usize, x1: usize| -> f64 {
        tab[y1 * (w + 1) + x1] - tab[y0 * (w + 1) + x1] - tab[y1 * (w + 1) + x0]
            + tab[y0 * (w + 1) + x0]
    };
    let mut means = vec![0.0f64; h * w];
    let mut stds = vec![0.0f64; h * w];
    for y in 0..h {
        let y0 = y.saturating_sub(r);
        let y1 = (y + r + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(r);
            let x1 = (x + r + 1).min(w);
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            let s = rect(&sum, y0, x0, y1, x1);
            let s2 = rect(&sq, y0, x0, y1, x1);
            let m = s / n;
            let var = (s2 / n - m * m).max(0.0);
            means[y * w + x] = m;
            stds[y * w + x] = var.sqrt();
        }
    }
    (means, stds)
}

/// Produce the binary artifact mask E_A at image resolution.
pub fn detect_artifacts<S: Float>(
    detector: &DetectorSpec<S>,
    image: &ImageRgb<S>,
    reference: &ImageRgb<S>,
) -> Result<BinaryMask> {
    if !image.same_dims(reference) {
        return Err(Error::ShapeMismatch(format!(
            "image {}x{} vs reference {}x{}",
            image.height(),
            image.width(),
            reference.height(),
            reference.width()
        )));
    }
    match detector {
        DetectorSpec::None => Err(Error::DetectorNone),
        DetectorSpec::Oracle {
            truth,
            latent_h,
            latent_w,
        } => {
            let latent_mask = oracle_artifact_mask(truth, *latent_h, *latent_w)?;
            let (h, w) = (image.height(), image.width());
            if h % latent_h != 0 || w % latent_w != 0 {
                return Err(Error::Mask(format!(
                    "image {h}x{w} is not an integer multiple of latent {latent_h}x{latent_w}"
                )));
            }
            let ry = h / latent_h;
            let rx = w / latent_w;
            // nearest-neighbor upsample to image resolution
            Ok(BinaryMask::from_fn(h, w, |y, x| {
                latent_mask.get(y / ry, x / rx) == 1
            }))
        }
        DetectorSpec::StatDivergence { patch, threshold } => {
            let ya = rgb_to_y(image);
            let yb = rgb_to_y(reference);
            let (ma, sa) = patch_stats(&ya, *patch);
            let (mb, sb) = patch_stats(&yb, *patch);
            let (h, w) = (image.height(), image.width());
            Ok(BinaryMask::from_fn(h, w, |y, x| {
                let i = y * w + x;
                (ma[i] - mb[i]).abs() + (sa[i] - sb[i]).abs() > *threshold
            }))
        }
    }
}

/// Reality mask M_R: element-wise complement of the artifact mask.
pub fn reality_mask<S: Float>(
    detector: &DetectorSpec<S>,
    image: &ImageRgb<S>,
    reference: &ImageRgb<S>,
) -> Result<BinaryMask> {
    Ok(detect_artifacts(detector, image, reference)?.invert())
}
