//! Pluggable noise predictors: an exact analytic Gaussian denoiser (no
//! training) and a corrupting wrapper that injects known artifacts so the
//! refinement machinery has a ground truth to be tested against.

use crate::error::{Error, Result};
use crate::grid::LatentGrid;
use crate::mask::BinaryMask;
use crate::rng::{sample_gaussian, RngStream};
use crate::schedule::NoiseSchedule;
use crate::Float;

/// Seed salt for the corruptor's noise mode; corruption is a pure
/// function of the step index, identical across paired runs.
const ARTIFACT_NOISE_SEED: u64 = 0x4152_5446_4143_5421;

/// A rectangle in latent coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub y: usize,
    pub x: usize,
    pub h: usize,
    pub w: usize,
}

impl Rect {
    pub fn new(y: usize, x: usize, h: usize, w: usize) -> Self {
        Self { y, x, h, w }
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        y >= self.y && y < self.y + self.h && x >= self.x && x < self.x + self.w
    }
}

/// How injected corruption perturbs the inner prediction inside the
/// region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactMode {
    /// Add `magnitude` verbatim.
    Bias,
    /// Add `magnitude * eps` with seeded standard-normal `eps`.
    Noise,
    /// Add `magnitude * sqrt(1 - alpha_bar_t)`, scaling with the step's
    /// noise coefficient so injected artifacts survive the reverse step
    /// visibly at every `t`.
    ScaledBias,
}

/// Ground-truth artifact injection: where, how, how strongly, and during
/// which steps.
#[derive(Debug, Clone)]
pub struct ArtifactSpec<S> {
    pub regions: Vec<Rect>,
    pub mode: ArtifactMode,
    pub magnitude: S,
    /// Inclusive step interval `[t_lo, t_hi]` during which the corruption
    /// is active.
    pub active_steps: (usize, usize),
}

impl<S: Float> ArtifactSpec<S> {
    pub fn new(
        regions: Vec<Rect>,
        mode: ArtifactMode,
        magnitude: S,
        active_steps: (usize, usize),
    ) -> Result<Self> {
        if magnitude < S::zero() {
            return Err(Error::InvalidConfig(
                "artifact magnitude must be >= 0".into(),
            ));
        }
        if active_steps.0 > active_steps.1 {
            return Err(Error::InvalidConfig(format!(
                "artifact active range [{}, {}] is empty",
                active_steps.0, active_steps.1
            )));
        }
        Ok(Self {
            regions,
            mode,
            magnitude,
            active_steps,
        })
    }

    pub fn active_at(&self, t: usize) -> bool {
        t >= self.active_steps.0 && t <= self.active_steps.1
    }

    fn check_bounds(&self, h: usize, w: usize) -> Result<()> {
        for r in &self.regions {
            if r.h == 0 || r.w == 0 || r.y + r.h > h || r.x + r.w > w {
                return Err(Error::RectOutOfBounds(format!(
                    "rect y={} x={} h={} w={} on {h}x{w} latent",
                    r.y, r.x, r.h, r.w
                )));
            }
        }
        Ok(())
    }
}

/// Noise predictor `eps_theta(x_t, cond, t)`.
#[derive(Debug, Clone)]
pub enum DenoiserSpec<S> {
    /// Closed-form posterior denoiser for a per-element Gaussian prior
    /// `x0 ~ N(prior_mean, prior_var)`. With `prior_mean = None` the
    /// conditioning latent serves as the prior mean, realizing
    /// LR-conditioned denoising exactly.
    AnalyticGaussian {
        prior_mean: Option<LatentGrid<S>>,
        prior_var: S,
    },
    /// Wraps an inner denoiser and injects artifacts inside the region
    /// while the step is in the active range.
    Corruptor {
        inner: Box<DenoiserSpec<S>>,
        artifact: ArtifactSpec<S>,
    },
}

impl<S: Float> DenoiserSpec<S> {
    /// Analytic denoiser with the conditioning latent as prior mean.
    pub fn analytic(prior_var: S) -> Self {
        DenoiserSpec::AnalyticGaussian {
            prior_mean: None,
            prior_var,
        }
    }

    /// Analytic denoiser with an explicit prior mean.
    pub fn analytic_with_prior(prior_mean: LatentGrid<S>, prior_var: S) -> Self {
        DenoiserSpec::AnalyticGaussian {
            prior_mean: Some(prior_mean),
            prior_var,
        }
    }

    pub fn corrupted(self, artifact: ArtifactSpec<S>) -> Self {
        DenoiserSpec::Corruptor {
            inner: Box::new(self),
            artifact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DenoiserSpec::AnalyticGaussian { prior_var, .. } => {
                if *prior_var <= S::zero() {
                    return Err(Error::InvalidConfig("prior_var must be > 0".into()));
                }
                Ok(())
            }
            DenoiserSpec::Corruptor { inner, .. } => match inner.as_ref() {
                DenoiserSpec::Corruptor { .. } => Err(Error::InvalidConfig(
                    "corruptor must wrap a non-corruptor denoiser".into(),
                )),
                other => other.validate(),
            },
        }
    }
}

/// Predict the noise content of `x_t`.
///
/// Analytic Gaussian: with prior `x0 ~ N(mu, v)` per element, the
/// posterior mean is
/// `E[x0 | x_t] = (v*sqrt(abar)*x_t + (1-abar)*mu) / (abar*v + 1-abar)`
/// and the prediction is
/// `eps_hat = (x_t - sqrt(abar)*E[x0|x_t]) / sqrt(1-abar)`.
pub fn predict_noise<S: Float>(
    denoiser: &DenoiserSpec<S>,
    x_t: &LatentGrid<S>,
    cond: &LatentGrid<S>,
    t: usize,
    schedule: &NoiseSchedule<S>,
) -> Result<LatentGrid<S>> {
    if !x_t.same_shape(cond) {
        return Err(Error::ShapeMismatch(format!(
            "x_t {:?} vs cond {:?}",
            x_t.shape(),
            cond.shape()
        )));
    }
    let abar = schedule.alpha_bar(t)?;
    match denoiser {
        DenoiserSpec::AnalyticGaussian {
            prior_mean,
            prior_var,
        } => {
            let mu = prior_mean.as_ref().unwrap_or(cond);
            if !x_t.same_shape(mu) {
                return Err(Error::ShapeMismatch(format!(
                    "x_t {:?} vs prior mean {:?}",
                    x_t.shape(),
                    mu.shape()
                )));
            }
            let v = *prior_var;
            let sqrt_abar = abar.sqrt();
            let one_minus = S::one() - abar;
            let denom = abar * v + one_minus;
            let sqrt_one_minus = one_minus.sqrt();
            x_t.zip_map(mu, |x, m| {
                let post_mean = (v * sqrt_abar * x + one_minus * m) / denom;
                (x - sqrt_abar * post_mean) / sqrt_one_minus
            })
        }
        DenoiserSpec::Corruptor { inner, artifact } => {
            let mut pred = predict_noise(inner, x_t, cond, t, schedule)?;
            if !artifact.active_at(t) {
                return Ok(pred);
            }
            let (_, h, w) = pred.shape();
            artifact.check_bounds(h, w)?;
            match artifact.mode {
                ArtifactMode::Bias | ArtifactMode::ScaledBias => {
                    let add = match artifact.mode {
                        ArtifactMode::Bias => artifact.magnitude,
                        _ => artifact.magnitude * (S::one() - abar).sqrt(),
                    };
                    apply_in_regions(&mut pred, &artifact.regions, |v| v + add);
                }
                ArtifactMode::Noise => {
                    let (c, h, w) = pred.shape();
                    let mut rng = RngStream::new(ARTIFACT_NOISE_SEED ^ t as u64, 1);
                    let eps: LatentGrid<S> = sample_gaussian(c, h, w, &mut rng)?;
                    let mag = artifact.magnitude;
                    let eps_data = eps.data();
                    let data = pred.data_mut();
                    for ch in 0..c {
                        for y in 0..h {
                            for x in 0..w {
                                if artifact.regions.iter().any(|r| r.contains(y, x)) {
                                    let i = (ch * h + y) * w + x;
                                    data[i] = data[i] + mag * eps_data[i];
                                }
                            }
                        }
                    }
                }
            }
            Ok(pred)
        }
    }
}

fn apply_in_regions<S: Float>(grid: &mut LatentGrid<S>, regions: &[Rect], f: impl Fn(S) -> S) {
    let (c, h, w) = grid.shape();
    let data = grid.data_mut();
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                if regions.iter().any(|r| r.contains(y, x)) {
                    let i = (ch * h + y) * w + x;
                    data[i] = f(data[i]);
                }
            }
        }
    }
}

/// Ground-truth artifact mask at latent resolution: 1 exactly on the
/// union of the artifact's rectangles.
pub fn oracle_artifact_mask<S: Float>(
    artifact: &ArtifactSpec<S>,
    latent_h: usize,
    latent_w: usize,
) -> Result<BinaryMask> {
    artifact.check_bounds(latent_h, latent_w)?;
    Ok(BinaryMask::from_fn(latent_h, latent_w, |y, x| {
        artifact.regions.iter().any(|r| r.contains(y, x))
    }))
}
