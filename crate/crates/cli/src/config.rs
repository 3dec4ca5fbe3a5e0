//! Experiment configuration (TOML) and the sampler-variant vocabulary.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use sargd_core::{
    ArtifactMode, ArtifactSpec, BlendMode, CodecSpec, DenoiserSpec, DetectorSpec, LatentGrid, Rect,
    RngStream, SamplerConfig, StepPolicy,
};

/// Top-level experiment config, parsed from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Upscaling factors, each in {2, 3, 4}.
    pub scales: Vec<u32>,
    /// Variant names; see [`variant_names`] for the vocabulary.
    pub variants: Vec<String>,
    /// Step counts for the step sweep, each >= 10.
    #[serde(default)]
    pub step_sweep: Vec<usize>,
    pub master_seed: u64,
    #[serde(default = "default_total_steps")]
    pub total_steps: usize,
    /// Worker threads; 0 means the rayon default.
    #[serde(default)]
    pub threads: usize,
    /// Write wall_ms as 0 so repeated runs are byte-identical.
    #[serde(default)]
    pub deterministic_timing: bool,
    #[serde(default)]
    pub corruptor: CorruptorConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    /// Prior variance of the analytic denoiser.
    #[serde(default = "default_prior_var")]
    pub prior_var: f32,
}

fn default_total_steps() -> usize {
    100
}

fn default_prior_var() -> f32 {
    5e-4
}

/// Artifact injection protocol for the synthetic-corpus experiments.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptorConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// "bias", "noise" or "scaled_bias".
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_magnitude")]
    pub magnitude: f32,
    /// Fraction of the latent area the injected rectangle covers when no
    /// explicit regions are given.
    #[serde(default = "default_region_fraction")]
    pub region_fraction: f64,
    /// Explicit rectangles `[y, x, h, w]` in latent coordinates;
    /// empty means one per-image seeded rectangle.
    #[serde(default)]
    pub regions: Vec<[usize; 4]>,
    /// Active step interval `[t_lo, t_hi]`; empty means the whole chain.
    #[serde(default)]
    pub active: Vec<usize>,
}

fn default_true() -> bool {
    true
}

fn default_mode() -> String {
    "bias".into()
}

fn default_magnitude() -> f32 {
    5.0
}

fn default_region_fraction() -> f64 {
    0.12
}

impl Default for CorruptorConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            mode: default_mode(),
            magnitude: default_magnitude(),
            region_fraction: default_region_fraction(),
            regions: Vec::new(),
            active: Vec::new(),
        }
    }
}

/// Detector used by the guided variants.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// "stat_divergence" or "oracle".
    #[serde(default = "default_detector_kind")]
    pub kind: String,
    #[serde(default = "default_patch")]
    pub patch: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_detector_kind() -> String {
    "stat_divergence".into()
}

fn default_patch() -> usize {
    5
}

fn default_threshold() -> f64 {
    0.10
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            kind: default_detector_kind(),
            patch: default_patch(),
            threshold: default_threshold(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            bail!("scales must be non-empty");
        }
        for s in &self.scales {
            if !(2..=4).contains(s) {
                bail!("scale {s} not in {{2, 3, 4}}");
            }
        }
        if self.variants.is_empty() {
            bail!("variants must be non-empty");
        }
        for v in &self.variants {
            if !variant_names().contains(&v.as_str()) {
                bail!(
                    "unknown variant '{v}'; known: {}",
                    variant_names().join(", ")
                );
            }
        }
        for t in &self.step_sweep {
            if *t < 10 {
                bail!("step sweep values must be >= 10, got {t}");
            }
        }
        if self.total_steps == 0 {
            bail!("total_steps must be >= 1");
        }
        match self.corruptor.mode.as_str() {
            "bias" | "noise" | "scaled_bias" => {}
            other => bail!("unknown corruptor mode '{other}'"),
        }
        if !self.corruptor.active.is_empty() && self.corruptor.active.len() != 2 {
            bail!("corruptor.active must be [t_lo, t_hi]");
        }
        match self.detector.kind.as_str() {
            "stat_divergence" | "oracle" => {}
            other => bail!("unknown detector kind '{other}'"),
        }
        Ok(())
    }
}

/// The variant vocabulary: the three headline presets plus the ablation
/// schedules and the detector-off fallback.
pub fn variant_names() -> Vec<&'static str> {
    vec![
        "baseline",
        "rgr_only",
        "rgr_sag",
        "rgr_every_10",
        "rgr_first_k",
        "rgr_last_k",
        "sag_after_k",
        "direct_sum",
    ]
}

/// `k` for the first-k/last-k/after-k ablations: 100 when the chain is
/// long enough, otherwise half the chain.
pub fn ablation_k(total_steps: usize) -> usize {
    if total_steps >= 200 {
        100
    } else {
        (total_steps / 2).max(1)
    }
}

/// Everything a variant needs that depends on the specific image.
pub struct VariantInputs<'a> {
    /// Encoded ground-truth HR latent: the stand-in for a pretrained
    /// prior's knowledge of realistic content.
    pub hr_prior: &'a LatentGrid<f32>,
    /// Per-image seed shared by all variants (artifact placement).
    pub image_seed: u64,
    pub latent_h: usize,
    pub latent_w: usize,
}

fn corruptor_regions(cfg: &CorruptorConfig, inp: &VariantInputs<'_>) -> Vec<Rect> {
    if !cfg.regions.is_empty() {
        return cfg
            .regions
            .iter()
            .map(|&[y, x, h, w]| Rect::new(y, x, h, w))
            .collect();
    }
    // one seeded rectangle covering ~region_fraction of the latent,
    // identical across variants of the same image
    let mut rng = RngStream::new(inp.image_seed, 7);
    let side = cfg.region_fraction.sqrt();
    let rh = ((inp.latent_h as f64 * side).round() as usize).clamp(1, inp.latent_h);
    let rw = ((inp.latent_w as f64 * side).round() as usize).clamp(1, inp.latent_w);
    let y = rng.next_range(0, (inp.latent_h - rh) as u64) as usize;
    let x = rng.next_range(0, (inp.latent_w - rw) as u64) as usize;
    vec![Rect::new(y, x, rh, rw)]
}

fn build_artifact(
    cfg: &CorruptorConfig,
    inp: &VariantInputs<'_>,
    total_steps: usize,
) -> Result<ArtifactSpec<f32>> {
    let mode = match cfg.mode.as_str() {
        "bias" => ArtifactMode::Bias,
        "noise" => ArtifactMode::Noise,
        "scaled_bias" => ArtifactMode::ScaledBias,
        other => bail!("unknown corruptor mode '{other}'"),
    };
    let active = if cfg.active.len() == 2 {
        (cfg.active[0], cfg.active[1])
    } else {
        (1, total_steps)
    };
    Ok(ArtifactSpec::new(
        corruptor_regions(cfg, inp),
        mode,
        cfg.magnitude,
        active,
    )?)
}

fn build_detector(
    cfg: &ExperimentConfig,
    artifact: &ArtifactSpec<f32>,
    inp: &VariantInputs<'_>,
) -> Result<DetectorSpec<f32>> {
    Ok(match cfg.detector.kind.as_str() {
        "oracle" => DetectorSpec::oracle(artifact.clone(), inp.latent_h, inp.latent_w),
        _ => DetectorSpec::stat_divergence(cfg.detector.patch, cfg.detector.threshold)?,
    })
}

/// Materialize a named variant into a full sampler config for one image.
pub fn build_variant(
    name: &str,
    cfg: &ExperimentConfig,
    inp: &VariantInputs<'_>,
    total_steps: usize,
    seed: u64,
) -> Result<SamplerConfig<f32>> {
    let k = ablation_k(total_steps);
    let denoiser = {
        let inner = DenoiserSpec::analytic_with_prior(inp.hr_prior.clone(), cfg.prior_var);
        if cfg.corruptor.enabled {
            inner.corrupted(build_artifact(&cfg.corruptor, inp, total_steps)?)
        } else {
            inner
        }
    };
    let artifact = build_artifact(&cfg.corruptor, inp, total_steps)?;
    let detector = build_detector(cfg, &artifact, inp)?;

    let (rgr, sag, det, blend) = match name {
        "baseline" => (
            StepPolicy::Off,
            StepPolicy::Off,
            DetectorSpec::None,
            BlendMode::Masked,
        ),
        "rgr_only" => (
            StepPolicy::EveryStep,
            StepPolicy::Off,
            detector,
            BlendMode::Masked,
        ),
        "rgr_sag" => (
            StepPolicy::EveryStep,
            StepPolicy::EveryStep,
            detector,
            BlendMode::Masked,
        ),
        "rgr_every_10" => (
            StepPolicy::EveryTen,
            StepPolicy::Off,
            detector,
            BlendMode::Masked,
        ),
        "rgr_first_k" => (
            StepPolicy::FirstK(k),
            StepPolicy::Off,
            detector,
            BlendMode::Masked,
        ),
        "rgr_last_k" => (
            StepPolicy::LastK(k),
            StepPolicy::Off,
            detector,
            BlendMode::Masked,
        ),
        "sag_after_k" => (
            StepPolicy::EveryStep,
            StepPolicy::LastK(k),
            detector,
            BlendMode::Masked,
        ),
        "direct_sum" => (
            StepPolicy::EveryStep,
            StepPolicy::Off,
            DetectorSpec::None,
            BlendMode::DirectSum,
        ),
        other => bail!("unknown variant '{other}'"),
    };

    let sampler = SamplerConfig {
        total_steps,
        rgr_policy: rgr,
        sag_policy: sag,
        detector: det,
        blend_mode: blend,
        codec: CodecSpec::identity(),
        denoiser,
        seed,
    };
    sampler.validate()?;
    Ok(sampler)
}
