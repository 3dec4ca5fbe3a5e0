//! Forward diffusion and the DDPM reverse step over latent grids.

use crate::error::{Error, Result};
use crate::grid::LatentGrid;
use crate::schedule::NoiseSchedule;
use crate::Float;

/// Forward diffusion to step `t`:
/// `x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps`.
pub fn forward_diffuse<S: Float>(
    x0: &LatentGrid<S>,
    t: usize,
    schedule: &NoiseSchedule<S>,
    noise: &LatentGrid<S>,
) -> Result<LatentGrid<S>> {
    if !x0.same_shape(noise) {
        return Err(Error::ShapeMismatch(format!(
            "x0 {:?} vs noise {:?}",
            x0.shape(),
            noise.shape()
        )));
    }
    let abar = schedule.alpha_bar(t)?;
    let signal = abar.sqrt();
    let sigma = (S::one() - abar).sqrt();
    x0.zip_map(noise, |x, e| signal * x + sigma * e)
}

/// Clean-signal estimate implied by a noise prediction:
/// `x0_hat = (x_t - sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_bar_t)`.
pub fn predict_x0<S: Float>(
    x_t: &LatentGrid<S>,
    eps_hat: &LatentGrid<S>,
    t: usize,
    schedule: &NoiseSchedule<S>,
) -> Result<LatentGrid<S>> {
    let abar = schedule.alpha_bar(t)?;
    let sigma = (S::one() - abar).sqrt();
    let inv_signal = S::one() / abar.sqrt();
    x_t.zip_map(eps_hat, |x, e| (x - sigma * e) * inv_signal)
}

/// One DDPM reverse step (`x_t -> x_{t-1}`):
///
/// `(1/sqrt(alpha_t)) * (x_t - ((1 - alpha_t)/sqrt(1 - alpha_bar_t)) * eps_hat)
///  + sqrt(1 - alpha_t) * noise`
///
/// with the fixed-beta variance `sigma_t = sqrt(1 - alpha_t)`. The
/// stochastic `noise` grid must be all zeros at `t = 1`.
pub fn reverse_step<S: Float>(
    x_t: &LatentGrid<S>,
    eps_hat: &LatentGrid<S>,
    t: usize,
    schedule: &NoiseSchedule<S>,
    noise: &LatentGrid<S>,
) -> Result<LatentGrid<S>> {
    if !x_t.same_shape(eps_hat) || !x_t.same_shape(noise) {
        return Err(Error::ShapeMismatch(format!(
            "x_t {:?} vs eps_hat {:?} vs noise {:?}",
            x_t.shape(),
            eps_hat.shape(),
            noise.shape()
        )));
    }
    if t == 1 && !noise.is_all_zero() {
        return Err(Error::NoiseAtFinalStep);
    }
    let alpha = schedule.alpha(t)?;
    let abar = schedule.alpha_bar(t)?;
    let inv_sqrt_alpha = S::one() / alpha.sqrt();
    let eps_coef = (S::one() - alpha) / (S::one() - abar).sqrt();
    let sigma = (S::one() - alpha).sqrt();

    let mut out = x_t.zip_map(eps_hat, |x, e| inv_sqrt_alpha * (x - eps_coef * e))?;
    if t > 1 {
        out = out.zip_map(noise, |m, n| m + sigma * n)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> NoiseSchedule<f64> {
        // alpha = [0.9, 0.8], alpha_bar = [0.9, 0.72]
        NoiseSchedule::linear(2, 0.1, 0.2).unwrap()
    }

    #[test]
    fn forward_zero_noise_scales_signal() {
        let s = sched();
        let x0 = LatentGrid::from_fn(1, 2, 2, |_, y, x| (y * 2 + x) as f64);
        let z = LatentGrid::zeros(1, 2, 2);
        let xt = forward_diffuse(&x0, 2, &s, &z).unwrap();
        for (a, b) in xt.data().iter().zip(x0.data()) {
            assert!((a - b * 0.72f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_zero_signal_scales_noise() {
        let s = sched();
        let x0 = LatentGrid::zeros(1, 2, 2);
        let n = LatentGrid::filled(1, 2, 2, 0.7);
        let xt = forward_diffuse(&x0, 2, &s, &n).unwrap();
        for a in xt.data() {
            assert!((a - 0.7 * 0.28f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_scalar_matches_oracle() {
        // Oracle script: sqrt(0.72)*1.0 + sqrt(0.28)*0.5 = 1.1131032685303162
        let s = sched();
        let x0 = LatentGrid::filled(1, 1, 1, 1.0);
        let n = LatentGrid::filled(1, 1, 1, 0.5);
        let xt = forward_diffuse(&x0, 2, &s, &n).unwrap();
        assert!((xt.data()[0] - 1.1131032685303162).abs() < 1e-6);
    }

    #[test]
    fn forward_rejects_shape_mismatch_and_bad_t() {
        let s = sched();
        let x0 = LatentGrid::zeros(1, 2, 2);
        let n = LatentGrid::zeros(1, 2, 3);
        assert!(forward_diffuse(&x0, 1, &s, &n).is_err());
        let n = LatentGrid::zeros(1, 2, 2);
        assert!(forward_diffuse(&x0, 3, &s, &n).is_err());
        assert!(forward_diffuse(&x0, 0, &s, &n).is_err());
    }

    #[test]
    fn reverse_zero_prediction_at_t1_rescales() {
        let s = sched();
        let x1 = LatentGrid::filled(1, 2, 2, 0.45);
        let z = LatentGrid::zeros(1, 2, 2);
        let x0 = reverse_step(&x1, &z, 1, &s, &z).unwrap();
        for v in x0.data() {
            assert!((v - 0.45 / 0.9f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn reverse_scalar_matches_oracle() {
        // Oracle script: (1/sqrt(0.8)) * (1 - (0.2/sqrt(0.28)) * 0.5)
        //              = 0.9067454250677657
        let s = sched();
        let xt = LatentGrid::filled(1, 1, 1, 1.0);
        let eh = LatentGrid::filled(1, 1, 1, 0.5);
        let z = LatentGrid::zeros(1, 1, 1);
        let out = reverse_step(&xt, &eh, 2, &s, &z).unwrap();
        assert!((out.data()[0] - 0.9067454250677657).abs() < 1e-5);
    }

    #[test]
    fn reverse_noise_term_matches_oracle() {
        // Oracle script: 1/sqrt(0.8) + sqrt(0.2) = 1.5652475842498528
        let s = sched();
        let xt = LatentGrid::filled(1, 1, 1, 1.0);
        let z = LatentGrid::zeros(1, 1, 1);
        let n = LatentGrid::filled(1, 1, 1, 1.0);
        let out = reverse_step(&xt, &z, 2, &s, &n).unwrap();
        assert!((out.data()[0] - 1.5652475842498528).abs() < 1e-5);
    }

    #[test]
    fn reverse_rejects_nonzero_noise_at_t1() {
        let s = sched();
        let xt = LatentGrid::filled(1, 1, 1, 1.0);
        let z = LatentGrid::zeros(1, 1, 1);
        let n = LatentGrid::filled(1, 1, 1, 0.1);
        assert!(matches!(
            reverse_step(&xt, &z, 1, &s, &n),
            Err(Error::NoiseAtFinalStep)
        ));
    }

    #[test]
    fn predict_x0_inverts_forward_diffusion_given_true_noise() {
        let s = sched();
        let x0 = LatentGrid::from_fn(1, 3, 3, |_, y, x| 0.2 * (y as f64) - 0.1 * (x as f64));
        let mut rng = crate::rng::RngStream::new(4, 0);
        let eps: LatentGrid<f64> = crate::rng::sample_gaussian(1, 3, 3, &mut rng).unwrap();
        let xt = forward_diffuse(&x0, 2, &s, &eps).unwrap();
        let rec = predict_x0(&xt, &eps, 2, &s).unwrap();
        for (a, b) in rec.data().iter().zip(x0.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_step_forward_reverse_consistency() {
        // With T = 1 and eps_hat equal to the forward noise, the reverse
        // step inverts the forward step exactly.
        let s: NoiseSchedule<f64> = NoiseSchedule::linear(1, 0.1, 0.1).unwrap();
        let x0 = LatentGrid::from_fn(2, 3, 3, |c, y, x| 0.1 * (c + y + x) as f64 - 0.4);
        let mut rng = crate::rng::RngStream::new(11, 0);
        let eps: LatentGrid<f64> = crate::rng::sample_gaussian(2, 3, 3, &mut rng).unwrap();
        let x1 = forward_diffuse(&x0, 1, &s, &eps).unwrap();
        let z = LatentGrid::zeros(2, 3, 3);
        let rec = reverse_step(&x1, &eps, 1, &s, &z).unwrap();
        for (a, b) in rec.data().iter().zip(x0.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_variance_preservation_on_unit_variance_inputs() {
        // sqrt(abar)^2 + (1 - abar) = 1: empirical variance within 5%.
        let s: NoiseSchedule<f64> = NoiseSchedule::ddpm_rescaled(50).unwrap();
        let mut rng = crate::rng::RngStream::new(5, 0);
        let x0: LatentGrid<f64> = crate::rng::sample_gaussian(1, 64, 64, &mut rng).unwrap();
        let eps: LatentGrid<f64> = crate::rng::sample_gaussian(1, 64, 64, &mut rng).unwrap();
        for t in [1, 25, 50] {
            let xt = forward_diffuse(&x0, t, &s, &eps).unwrap();
            let n = xt.data().len() as f64;
            let mean = xt.data().iter().sum::<f64>() / n;
            let var = xt
                .data()
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / n;
            assert!((var - 1.0).abs() < 0.05, "t={t} var={var}");
        }
    }
}
