//! Binary masks (artifact mask E_A, reality mask M_R) and the reality
//! score.

use crate::error::{Error, Result};

/// An H×W {0,1} map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDims(format!(
                "mask dims must be >= 1, got {height}x{width}"
            )));
        }
        if bits.len() != height * width {
            return Err(Error::Mask(format!(
                "bit length {} != {height}x{width}",
                bits.len()
            )));
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::Mask("mask values must be 0 or 1".into()));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![0; height * width],
        }
    }

    pub fn ones(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![1; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(y, x) as u8);
            }
        }
        Self {
            height,
            width,
            bits,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: bool) {
        self.bits[y * self.width + x] = v as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Element-wise `1 - bit`.
    pub fn invert(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }
}

/// Fraction of a mask marked 1, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealityScore {
    pub value: f64,
}

/// Normalized sum of the reality mask: `sum(M) / (H*W)`.
pub fn reality_score(mask: &BinaryMask) -> RealityScore {
    RealityScore {
        value: mask.count_ones() as f64 / (mask.height() * mask.width()) as f64,
    }
}

/// Downscale an image-resolution mask to latent resolution by max-pooling
/// each receptive block: a latent cell is 1 iff any covered pixel is 1.
/// Mask dims must be integer multiples of the latent dims.
pub fn resize_mask_to_latent(
    mask: &BinaryMask,
    latent_h: usize,
    latent_w: usize,
) -> Result<BinaryMask> {
    if latent_h == 0 || latent_w == 0 {
        return Err(Error::InvalidDims("latent dims must be >= 1".into()));
    }
    if !mask.height().is_multiple_of(latent_h) || !mask.width().is_multiple_of(latent_w) {
        return Err(Error::Mask(format!(
            "mask {}x{} is not an integer multiple of latent {latent_h}x{latent_w}",
            mask.height(),
            mask.width()
        )));
    }
    let ry = mask.height() / latent_h;
    let rx = mask.width() / latent_w;
    Ok(BinaryMask::from_fn(latent_h, latent_w, |ly, lx| {
        for y in ly * ry..(ly + 1) * ry {
            for x in lx * rx..(lx + 1) * rx {
                if mask.get(y, x) == 1 {
                    return true;
                }
            }
        }
        false
    }))
}
