//! Toy image<->latent codecs standing in for a learned encoder/decoder
//! pair: `identity` (latent == image, planar) and `pool2x` (2x2 mean-pool
//! encode, bilinear 2x decode). Both fix the latent at 3 channels.

use crate::error::{Error, Result};
use crate::grid::LatentGrid;
use crate::image_rgb::ImageRgb;
use crate::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecKind {
    Identity,
    Pool2x,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecSpec {
    pub kind: CodecKind,
    pub latent_channels: usize,
}

impl CodecSpec {
    pub fn identity() -> Self {
        Self {
            kind: CodecKind::Identity,
            latent_channels: 3,
        }
    }

    pub fn pool2x() -> Self {
        Self {
            kind: CodecKind::Pool2x,
            latent_channels: 3,
        }
    }

    /// Latent dims (C, H, W) for an image of `h x w`.
    pub fn latent_dims(&self, h: usize, w: usize) -> Result<(usize, usize, usize)> {
        match self.kind {
            CodecKind::Identity => Ok((3, h, w)),
            CodecKind::Pool2x => {
                if !h.is_multiple_of(2) || !w.is_multiple_of(2) {
                    return Err(Error::Codec(format!(
                        "pool2x requires even image dims, got {h}x{w}"
                    )));
                }
                Ok((3, h / 2, w / 2))
            }
        }
    }

    /// Image dims (H, W) decoded from a latent of `lh x lw`.
    pub fn image_dims(&self, lh: usize, lw: usize) -> (usize, usize) {
        match self.kind {
            CodecKind::Identity => (lh, lw),
            CodecKind::Pool2x => (2 * lh, 2 * lw),
        }
    }
}

/// Encode an image into a latent grid.
pub fn encode<S: Float>(image: &ImageRgb<S>, codec: &CodecSpec) -> Result<LatentGrid<S>> {
    let (c, lh, lw) = codec.latent_dims(image.height(), image.width())?;
    match codec.kind {
        CodecKind::Identity => Ok(LatentGrid::from_fn(c, lh, lw, |ch, y, x| {
            image.get(y, x)[ch]
        })),
        CodecKind::Pool2x => {
            Ok(LatentGrid::from_fn(c, lh, lw, |ch, y, x| {
                let p00 = image.get(2 * y, 2 * x)[ch];
                let p01 = image.get(2 * y, 2 * x + 1)[ch];
                let p10 = image.get(2 * y + 1, 2 * x)[ch];
                let p11 = image.get(2 * y + 1, 2 * x + 1)[ch];
                // pairwise sum keeps constant blocks exact
                ((p00 + p01) + (p10 + p11)) * S::from_f64_lossy(0.25)
            }))
        }
    }
}

/// Decode a latent grid back into an image; outputs are clamped to
/// `[0, 1]`.
pub fn decode<S: Float>(latent: &LatentGrid<S>, codec: &CodecSpec) -> Result<ImageRgb<S>> {
    if latent.channels() != codec.latent_channels {
        return Err(Error::Codec(format!(
            "latent has {} channels, codec expects {}",
            latent.channels(),
            codec.latent_channels
        )));
    }
    let (lh, lw) = (latent.height(), latent.width());
    let (h, w) = codec.image_dims(lh, lw);
    match codec.kind {
        CodecKind::Identity => Ok(ImageRgb::from_fn(h, w, |y, x| {
            [
                latent.get(0, y, x),
                latent.get(1, y, x),
                latent.get(2, y, x),
            ]
        })),
        CodecKind::Pool2x => {
            // bilinear 2x with half-pixel centers and clamped edges;
            // the lerp form a + f*(b - a) keeps constants exact
            let sample = |ch: usize, y: usize, x: usize| -> S {
                let uy = (y as f64 + 0.5) / 2.0 - 0.5;
                let ux = (x as f64 + 0.5) / 2.0 - 0.5;
                let y0 = uy.floor().max(0.0) as usize;
                let x0 = ux.floor().max(0.0) as usize;
                let y1 = (y0 + 1).min(lh - 1);
                let x1 = (x0 + 1).min(lw - 1);
                let fy = S::from_f64_lossy((uy - y0 as f64).clamp(0.0, 1.0));
                let fx = S::from_f64_lossy((ux - x0 as f64).clamp(0.0, 1.0));
                let a = latent.get(ch, y0, x0);
                let b = latent.get(ch, y0, x1);
                let c = latent.get(ch, y1, x0);
                let d = latent.get(ch, y1, x1);
                let top = a + fx * (b - a);
                let bot = c + fx * (d - c);
                top + fy * (bot - top)
            };
            Ok(ImageRgb::from_fn(h, w, |y, x| {
                [sample(0, y, x), sample(1, y, x), sample(2, y, x)]
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_round_trip_is_exact() {
        let img = ImageRgb::from_fn(4, 5, |y, x| {
            [
                (y as f64) / 10.0,
                (x as f64) / 10.0,
                ((y + x) as f64) / 20.0,
            ]
        });
        let codec = CodecSpec::identity();
        let lat = encode(&img, &codec).unwrap();
        assert_eq!(lat.shape(), (3, 4, 5));
        let back = decode(&lat, &codec).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn identity_decode_clamps() {
        let lat = LatentGrid::filled(3, 2, 2, 1.5f64);
        let img = decode(&lat, &CodecSpec::identity()).unwrap();
        for v in img.pixels() {
            assert_eq!(*v, 1.0);
        }
    }

    #[test]
    fn pool2x_constant_block_is_mean() {
        let img: ImageRgb<f64> = ImageRgb::constant(2, 2, 0.5).unwrap();
        let lat = encode(&img, &CodecSpec::pool2x()).unwrap();
        assert_eq!(lat.shape(), (3, 1, 1));
        for c in 0..3 {
            assert_eq!(lat.get(c, 0, 0), 0.5);
        }
    }

    #[test]
    fn pool2x_mixed_block_mean_matches_hand_oracle() {
        // block [0, 1; 1, 0] -> mean 0.5
        let vals = [[0.0, 1.0], [1.0, 0.0]];
        let img = ImageRgb::from_fn(2, 2, |y, x| [vals[y][x]; 3]);
        let lat = encode(&img, &CodecSpec::pool2x()).unwrap();
        assert_eq!(lat.get(0, 0, 0), 0.5);
    }

    #[test]
    fn pool2x_round_trip_exact_on_constant_images() {
        let img: ImageRgb<f32> = ImageRgb::constant(6, 8, 0.37).unwrap();
        let codec = CodecSpec::pool2x();
        let back = decode(&encode(&img, &codec).unwrap(), &codec).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pool2x_rejects_odd_dims() {
        let img: ImageRgb<f64> = ImageRgb::constant(3, 4, 0.5).unwrap();
        assert!(encode(&img, &CodecSpec::pool2x()).is_err());
    }

    #[test]
    fn decode_rejects_channel_mismatch() {
        let lat = LatentGrid::zeros(2, 2, 2);
        assert!(decode::<f64>(&lat, &CodecSpec::identity()).is_err());
    }

    #[test]
    fn decoded_values_always_in_unit_interval() {
        let lat = LatentGrid::from_fn(3, 4, 4, |c, y, x| {
            ((c + y + x) as f64) - 4.0 // spans [-4, 7]
        });
        for codec in [CodecSpec::identity(), CodecSpec::pool2x()] {
            let img = decode(&lat, &codec).unwrap();
            for v in img.pixels() {
                assert!(*v >= 0.0 && *v <= 1.0);
            }
        }
    }
}
