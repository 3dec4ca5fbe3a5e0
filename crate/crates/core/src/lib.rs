//! Training-free guided diffusion sampling for artifact-suppressed
//! super-resolution.
//!
//! The crate provides the full sampling stack: DDPM noise schedules and
//! reverse steps over latent grids, toy image/latent codecs with a
//! Matlab-convention bicubic resampler, pluggable analytic denoisers with
//! ground-truth artifact injection, binary artifact/reality masks with
//! pluggable detectors, the reality-guided sampler itself, and Y-channel
//! PSNR/SSIM metrics.
//!
//! All numeric code is generic over the scalar type via [`Float`];
//! concrete aliases for the common instantiations live at the crate root.

pub mod codec;
pub mod denoiser;
pub mod detector;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod image_rgb;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod resize;
pub mod rng;
pub mod sampler;
pub mod schedule;

pub use codec::{decode, encode, CodecKind, CodecSpec};
pub use denoiser::{
    oracle_artifact_mask, predict_noise, ArtifactMode, ArtifactSpec, DenoiserSpec, Rect,
};
pub use detector::{detect_artifacts, reality_mask, DetectorSpec};
pub use diffusion::{forward_diffuse, reverse_step};
pub use error::{Error, Result};
pub use grid::LatentGrid;
pub use image_rgb::{rgb_to_y, ImageRgb, Plane};
pub use mask::{reality_score, resize_mask_to_latent, BinaryMask, RealityScore};
pub use metrics::{psnr_y, ssim_y, MetricReport};
pub use resize::{bicubic_resize, Scale};
pub use rng::{sample_gaussian, splitmix64, RngStream};
pub use sampler::{
    direct_sum_refine, initialize, policy_active, rgr_refine, run_sargd, run_sargd_observed,
    sag_update, BlendMode, GuidanceState, SamplerConfig, StepPolicy, StepRecord, StepSnapshot,
    Trace,
};
pub use schedule::NoiseSchedule;

use rand_chacha::ChaCha8Rng;

/// Scalar type the numeric core is generic over: `f32` or `f64`.
pub trait Float:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Draw one standard-normal sample, advancing the generator.
    fn standard_normal(rng: &mut ChaCha8Rng) -> Self;

    /// Lossless-enough conversion from `f64` for kernel weights and
    /// schedule coefficients.
    fn from_f64_lossy(v: f64) -> Self;
}

impl Float for f32 {
    fn standard_normal(rng: &mut ChaCha8Rng) -> Self {
        use rand::Rng;
        rng.sample(rand_distr::StandardNormal)
    }

    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }
}

impl Float for f64 {
    fn standard_normal(rng: &mut ChaCha8Rng) -> Self {
        use rand::Rng;
        rng.sample(rand_distr::StandardNormal)
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }
}

pub type LatentGridF32 = LatentGrid<f32>;
pub type LatentGridF64 = LatentGrid<f64>;
pub type ImageRgbF32 = ImageRgb<f32>;
pub type ImageRgbF64 = ImageRgb<f64>;
pub type NoiseScheduleF32 = NoiseSchedule<f32>;
pub type NoiseScheduleF64 = NoiseSchedule<f64>;
pub type SamplerConfigF32 = SamplerConfig<f32>;
