//! DDPM noise schedules: per-step beta/alpha and the cumulative signal
//! coefficient alpha_bar.

use crate::error::{Error, Result};
use crate::Float;

/// Per-step noise schedule for a `T`-step chain.
///
/// `alpha_bar` is the cumulative product of `alpha = 1 - beta`; it is the
/// single quantity the forward and reverse formulas share, and the
/// reverse step reads both `alpha_t` and `alpha_bar_t`. Step indices are
/// 1-based throughout, matching the sampling loop that counts `t` down
/// from `T` to 1.
#[derive(Debug, Clone)]
pub struct NoiseSchedule<S> {
    beta: Vec<S>,
    alpha: Vec<S>,
    alpha_bar: Vec<S>,
}

impl<S: Float> NoiseSchedule<S> {
    /// Linear beta schedule over `total_steps`, inclusive of both
    /// endpoints.
    pub fn linear(total_steps: usize, beta_start: f64, beta_end: f64) -> Result<Self> {
        if total_steps == 0 {
            return Err(Error::InvalidSchedule("T must be >= 1".into()));
        }
        if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]"
            )));
        }
        let mut beta = Vec::with_capacity(total_steps);
        for i in 0..total_steps {
            let frac = if total_steps == 1 {
                0.0
            } else {
                i as f64 / (total_steps - 1) as f64
            };
            beta.push(S::from_f64_lossy(
                beta_start + (beta_end - beta_start) * frac,
            ));
        }
        let alpha: Vec<S> = beta.iter().map(|&b| S::one() - b).collect();
        let mut alpha_bar = Vec::with_capacity(total_steps);
        let mut prod = S::one();
        for &a in &alpha {
            prod = prod * a;
            alpha_bar.push(prod);
        }
        Ok(Self {
            beta,
            alpha,
            alpha_bar,
        })
    }

    /// The default schedule: the standard DDPM-1000 linear range
    /// `[1e-4, 0.02]` rescaled by `1000/T` and clamped to `(0, 0.999)`,
    /// keeping `alpha_bar_T` comparable across step counts.
    pub fn ddpm_rescaled(total_steps: usize) -> Result<Self> {
        if total_steps == 0 {
            return Err(Error::InvalidSchedule("T must be >= 1".into()));
        }
        let factor = 1000.0 / total_steps as f64;
        let lo = (1e-4 * factor).min(0.999);
        let hi = (0.02 * factor).min(0.999);
        Self::linear(total_steps, lo, hi)
    }

    /// Number of steps `T`.
    pub fn total_steps(&self) -> usize {
        self.beta.len()
    }

    fn check(&self, t: usize) -> Result<usize> {
        if t == 0 || t > self.beta.len() {
            return Err(Error::StepOutOfRange {
                t,
                total: self.beta.len(),
            });
        }
        Ok(t - 1)
    }

    /// `beta_t`, 1-based.
    pub fn beta(&self, t: usize) -> Result<S> {
        Ok(self.beta[self.check(t)?])
    }

    /// `alpha_t = 1 - beta_t`, 1-based.
    pub fn alpha(&self, t: usize) -> Result<S> {
        Ok(self.alpha[self.check(t)?])
    }

    /// Cumulative `alpha_bar_t = prod_{s<=t} alpha_s`, 1-based.
    pub fn alpha_bar(&self, t: usize) -> Result<S> {
        Ok(self.alpha_bar[self.check(t)?])
    }

    pub fn betas(&self) -> &[S] {
        &self.beta
    }

    pub fn alphas(&self) -> &[S] {
        &self.alpha
    }

    pub fn alpha_bars(&self) -> &[S] {
        &self.alpha_bar
    }
}
