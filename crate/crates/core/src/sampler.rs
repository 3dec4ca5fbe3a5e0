//! The reality-guided sampling loop: DDPM reverse sampling with masked
//! latent refinement against a guidance latent, a reality score tracking
//! how much of each step's latent needed no correction, and a strictly
//! gated self-adaptive update of the guidance itself.

use crate::codec::{decode, encode, CodecSpec};
use crate::denoiser::{predict_noise, DenoiserSpec};
use crate::detector::{detect_artifacts, DetectorSpec};
use crate::diffusion::{forward_diffuse, predict_x0, reverse_step};
use crate::error::{Error, Result};
use crate::grid::LatentGrid;
use crate::image_rgb::ImageRgb;
use crate::mask::{reality_score, resize_mask_to_latent, BinaryMask, RealityScore};
use crate::resize::{bicubic_resize, Scale};
use crate::rng::{sample_gaussian, RngStream};
use crate::schedule::NoiseSchedule;
use crate::Float;

/// When a per-step mechanism fires, expressed against the countdown loop
/// `t = T..1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    EveryStep,
    /// Every tenth iteration, counting from the start of the loop.
    EveryTen,
    /// Only the first `k` iterations (`t > T - k`): the noisy phase.
    FirstK(usize),
    /// Only the final `k` iterations (`t <= k`).
    LastK(usize),
    Off,
}

impl StepPolicy {
    fn k(&self) -> Option<usize> {
        match self {
            StepPolicy::FirstK(k) | StepPolicy::LastK(k) => Some(*k),
            _ => None,
        }
    }

    pub fn is_off(&self) -> bool {
        matches!(self, StepPolicy::Off)
    }
}

/// Whether the policy fires at step `t` of a `total`-step countdown.
pub fn policy_active(policy: StepPolicy, t: usize, total: usize) -> Result<bool> {
    if t == 0 || t > total {
        return Err(Error::StepOutOfRange { t, total });
    }
    if let Some(k) = policy.k() {
        if k > total {
            return Err(Error::InvalidConfig(format!(
                "policy k={k} exceeds total steps {total}"
            )));
        }
    }
    Ok(match policy {
        StepPolicy::EveryStep => true,
        StepPolicy::EveryTen => (total - t).is_multiple_of(10),
        StepPolicy::FirstK(k) => t > total - k,
        StepPolicy::LastK(k) => t <= k,
        StepPolicy::Off => false,
    })
}

/// How an active refinement step combines the chain latent with the
/// guidance latent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlendMode {
    /// Masked replacement driven by the artifact mask.
    Masked,
    /// Element-wise mean with the guidance, no detection involved.
    DirectSum,
}

/// Full configuration of one sampling run.
#[derive(Debug, Clone)]
pub struct SamplerConfig<S> {
    pub total_steps: usize,
    pub rgr_policy: StepPolicy,
    pub sag_policy: StepPolicy,
    pub detector: DetectorSpec<S>,
    pub blend_mode: BlendMode,
    pub codec: CodecSpec,
    pub denoiser: DenoiserSpec<S>,
    pub seed: u64,
}

impl<S: Float> SamplerConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(Error::InvalidConfig("total_steps must be >= 1".into()));
        }
        for p in [self.rgr_policy, self.sag_policy] {
            if let Some(k) = p.k() {
                if k > self.total_steps {
                    return Err(Error::InvalidConfig(format!(
                        "policy k={k} exceeds total steps {}",
                        self.total_steps
                    )));
                }
            }
        }
        if !self.sag_policy.is_off() && self.detector.is_none() {
            return Err(Error::InvalidConfig(
                "sag policy requires a detector (got kind 'none')".into(),
            ));
        }
        self.denoiser.validate()
    }
}

/// The guidance latent and its current reality score.
#[derive(Debug, Clone)]
pub struct GuidanceState<S> {
    pub x_r: LatentGrid<S>,
    pub s_r: RealityScore,
}

/// One row of the per-step trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub s_r: f64,
    /// Fraction of latent cells flagged by detection this step; -1.0 when
    /// no detection ran.
    pub artifact_fraction: f64,
    pub rgr_applied: bool,
    pub sag_updated: bool,
}

/// Per-step records for a whole run, ordered t = T..1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
}

/// Artifact-fraction sentinel for steps without detection.
pub const ARTIFACT_FRACTION_SENTINEL: f64 = -1.0;

/// Masked refinement: `x * (1 - E_A) + x_r * E_A` with the mask broadcast
/// over channels. For binary masks this is an exact element-wise select.
pub fn rgr_refine<S: Float>(
    x: &LatentGrid<S>,
    artifact_mask: &BinaryMask,
    x_r: &LatentGrid<S>,
) -> Result<LatentGrid<S>> {
    if !x.same_shape(x_r) {
        return Err(Error::ShapeMismatch(format!(
            "x {:?} vs x_r {:?}",
            x.shape(),
            x_r.shape()
        )));
    }
    let (c, h, w) = x.shape();
    if artifact_mask.height() != h || artifact_mask.width() != w {
        return Err(Error::ShapeMismatch(format!(
            "mask {}x{} vs latent {h}x{w}",
            artifact_mask.height(),
            artifact_mask.width()
        )));
    }
    Ok(LatentGrid::from_fn(c, h, w, |ch, y, xx| {
        if artifact_mask.get(y, xx) == 1 {
            x_r.get(ch, y, xx)
        } else {
            x.get(ch, y, xx)
        }
    }))
}

/// Detector-free fallback: element-wise mean `(x + x_r) / 2`, preserving
/// latent scale.
pub fn direct_sum_refine<S: Float>(
    x: &LatentGrid<S>,
    x_r: &LatentGrid<S>,
) -> Result<LatentGrid<S>> {
    let half = S::from_f64_lossy(0.5);
    x.zip_map(x_r, |a, b| (a + b) * half)
}

/// Strictly gated guidance update: when `s_new > state.s_r`, blend the
/// new latent into the guidance on the reality mask and adopt the score;
/// ties and regressions leave the state unchanged.
pub fn sag_update<S: Float>(
    state: &GuidanceState<S>,
    x_r_new: &LatentGrid<S>,
    reality: &BinaryMask,
    s_new: RealityScore,
) -> Result<GuidanceState<S>> {
    if s_new.value <= state.s_r.value {
        return Ok(state.clone());
    }
    let blended = rgr_refine(&state.x_r, reality, x_r_new)?;
    Ok(GuidanceState {
        x_r: blended,
        s_r: s_new,
    })
}

/// Encode the upsampled LR image as the conditioning latent and seed the
/// guidance state from it.
///
/// The initial score is the detector's self-comparison on the decoded
/// guidance: 1.0 for divergence detectors (zero self-divergence) and
/// `1 - injected fraction` for the oracle. With no detector it is 1.0
/// vacuously.
pub fn initialize<S: Float>(
    i_lr: &ImageRgb<S>,
    scale: Scale,
    cfg: &SamplerConfig<S>,
) -> Result<(LatentGrid<S>, GuidanceState<S>)> {
    let up = bicubic_resize(i_lr, scale)?;
    let cond = encode(&up, &cfg.codec)?;
    let s_r = match &cfg.detector {
        DetectorSpec::None => RealityScore { value: 1.0 },
        det => {
            let img = decode(&cond, &cfg.codec)?;
            let e_a = detect_artifacts(det, &img, &img)?;
            let latent_mask = resize_mask_to_latent(&e_a, cond.height(), cond.width())?;
            reality_score(&latent_mask.invert())
        }
    };
    let state = GuidanceState {
        x_r: cond.clone(),
        s_r,
    };
    Ok((cond, state))
}

/// Everything a step observer gets to see: the post-refinement latent,
/// the latent-scale artifact mask when detection ran, and the guidance
/// that refinement read from (before any SAG update this step).
pub struct StepSnapshot<'a, S> {
    pub t: usize,
    pub latent: &'a LatentGrid<S>,
    pub artifact_mask: Option<&'a BinaryMask>,
    pub guidance: &'a LatentGrid<S>,
}

/// Run the full guided sampling loop. Deterministic given `cfg.seed`.
pub fn run_sargd<S: Float>(
    i_lr: &ImageRgb<S>,
    scale: Scale,
    cfg: &SamplerConfig<S>,
) -> Result<(ImageRgb<S>, Trace)> {
    run_sargd_observed(i_lr, scale, cfg, |_| {})
}

/// [`run_sargd`] with a per-step observer, called after refinement and
/// before the guidance update.
pub fn run_sargd_observed<S: Float>(
    i_lr: &ImageRgb<S>,
    scale: Scale,
    cfg: &SamplerConfig<S>,
    mut observer: impl FnMut(&StepSnapshot<'_, S>),
) -> Result<(ImageRgb<S>, Trace)> {
    cfg.validate()?;
    let total = cfg.total_steps;
    let schedule: NoiseSchedule<S> = NoiseSchedule::ddpm_rescaled(total)?;
    let (cond, init_state) = initialize(i_lr, scale, cfg)?;
    let (c, lh, lw) = cond.shape();

    // The run's gate starts from zero so the first measured score adopts
    // the guidance; the initializer's self-comparison score is not on the
    // run protocol's scale.
    let mut guidance = GuidanceState {
        x_r: init_state.x_r,
        s_r: RealityScore { value: 0.0 },
    };

    let mut rng = RngStream::new(cfg.seed, 0);
    let init_noise: LatentGrid<S> = sample_gaussian(c, lh, lw, &mut rng)?;
    let mut x = forward_diffuse(&cond, total, &schedule, &init_noise)?;

    let zero_noise = LatentGrid::zeros(c, lh, lw);
    let mut trace = Trace {
        steps: Vec::with_capacity(total),
    };

    for t in (1..=total).rev() {
        let noise = if t > 1 {
            sample_gaussian(c, lh, lw, &mut rng)?
        } else {
            zero_noise.clone()
        };
        let eps_hat = predict_noise(&cfg.denoiser, &x, &cond, t, &schedule)?;
        x = reverse_step(&x, &eps_hat, t, &schedule, &noise)?;

        let rgr_on = policy_active(cfg.rgr_policy, t, total)?;
        let sag_on = policy_active(cfg.sag_policy, t, total)?;

        let detection_wanted =
            !cfg.detector.is_none() && ((rgr_on && cfg.blend_mode == BlendMode::Masked) || sag_on);
        let artifact_latent = if detection_wanted {
            let img = decode(&x, &cfg.codec)?;
            let reference = decode(&guidance.x_r, &cfg.codec)?;
            let e_a = detect_artifacts(&cfg.detector, &img, &reference)?;
            Some(resize_mask_to_latent(&e_a, lh, lw)?)
        } else {
            None
        };

        let mut rgr_applied = false;
        if rgr_on {
            match cfg.blend_mode {
                BlendMode::Masked => {
                    if let Some(mask) = &artifact_latent {
                        x = rgr_refine(&x, mask, &guidance.x_r)?;
                        rgr_applied = true;
                    }
                    // no detector: refinement has nothing to act on
                }
                BlendMode::DirectSum => {
                    x = direct_sum_refine(&x, &guidance.x_r)?;
                    rgr_applied = true;
                }
            }
        }

        observer(&StepSnapshot {
            t,
            latent: &x,
            artifact_mask: artifact_latent.as_ref(),
            guidance: &guidance.x_r,
        });

        let artifact_fraction = artifact_latent
            .as_ref()
            .map(|m| m.count_ones() as f64 / (lh * lw) as f64)
            .unwrap_or(ARTIFACT_FRACTION_SENTINEL);

        let mut sag_updated = false;
        if sag_on {
            if let Some(e_a) = &artifact_latent {
                // Reality of the refined latent: the fraction of cells the
                // detector did not flag this step.
                let reality = e_a.invert();
                let s_new = reality_score(&reality);
                // The guidance is a clean reference latent, so absorb the
                // refined latent's clean-signal estimate rather than its
                // raw content at noise level t-1.
                let clean = if t > 1 {
                    let eps = predict_noise(&cfg.denoiser, &x, &cond, t - 1, &schedule)?;
                    predict_x0(&x, &eps, t - 1, &schedule)?
                } else {
                    x.clone()
                };
                let x_r_new = encode(&decode(&clean, &cfg.codec)?, &cfg.codec)?;
                let next = sag_update(&guidance, &x_r_new, &reality, s_new)?;
                sag_updated = next.s_r.value > guidance.s_r.value;
                guidance = next;
            }
        }

        trace.steps.push(StepRecord {
            t,
            s_r: guidance.s_r.value,
            artifact_fraction,
            rgr_applied,
            sag_updated,
        });
    }

    let output = decode(&x, &cfg.codec)?;
    Ok((output, trace))
}
