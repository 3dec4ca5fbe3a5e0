//! RGB images in `[0, 1]` and the luma plane used by metrics and the
//! divergence detector.

use crate::error::{Error, Result};
use crate::Float;

/// An H×W RGB image with interleaved pixels, channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRgb<S> {
    height: usize,
    width: usize,
    pixels: Vec<S>,
}

impl<S: Float> ImageRgb<S> {
    /// Build from interleaved RGB data (length `3*H*W`), validating the
    /// `[0, 1]` range.
    pub fn new(height: usize, width: usize, pixels: Vec<S>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDims(format!(
                "image dims must be >= 1, got {height}x{width}"
            )));
        }
        if pixels.len() != 3 * height * width {
            return Err(Error::ShapeMismatch(format!(
                "pixel length {} != 3*{}*{}",
                pixels.len(),
                height,
                width
            )));
        }
        if pixels
            .iter()
            .any(|v| !v.is_finite() || *v < S::zero() || *v > S::one())
        {
            return Err(Error::InvalidDims(
                "pixel values must be finite and in [0, 1]".into(),
            ));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Constant-valued gray image.
    pub fn constant(height: usize, width: usize, value: S) -> Result<Self> {
        Self::new(height, width, vec![value; 3 * height * width])
    }

    /// Image populated by `f(y, x) -> [r, g, b]`; values are clamped to
    /// `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [S; 3]) -> Self {
        let mut pixels = Vec::with_capacity(3 * height * width);
        for y in 0..height {
            for x in 0..width {
                let p = f(y, x);
                for v in p {
                    pixels.push(v.max(S::zero()).min(S::one()));
                }
            }
        }
        Self {
            height,
            width,
            pixels,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[S] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> [S; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn same_dims(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width
    }
}

/// A single-channel H×W plane of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane<S> {
    pub height: usize,
    pub width: usize,
    pub data: Vec<S>,
}

impl<S: Float> Plane<S> {
    #[inline]
    pub fn get(&self, y: usize, x: usize) -> S {
        self.data[y * self.width + x]
    }
}

/// BT.601 luma: `Y = 0.299 R + 0.587 G + 0.114 B` per pixel.
pub fn rgb_to_y<S: Float>(image: &ImageRgb<S>) -> Plane<S> {
    let wr = S::from_f64_lossy(0.299);
    let wg = S::from_f64_lossy(0.587);
    let wb = S::from_f64_lossy(0.114);
    let data = image
        .pixels()
        .chunks_exact(3)
        .map(|p| wr * p[0] + wg * p[1] + wb * p[2])
        .collect();
    Plane {
        height: image.height(),
        width: image.width(),
        data,
    }
}
