//! Property tests for invariants that hold over whole input families
//! rather than single fixtures.

use proptest::prelude::*;

use sargd_core::{
    decode, detect_artifacts, direct_sum_refine, encode, forward_diffuse, oracle_artifact_mask,
    predict_noise, reality_mask, reality_score, resize_mask_to_latent, rgr_refine, ArtifactMode,
    ArtifactSpec, BinaryMask, CodecSpec, DenoiserSpec, DetectorSpec, ImageRgb, LatentGrid,
    NoiseSchedule, Rect,
};

fn small_grid() -> impl Strategy<Value = LatentGrid<f64>> {
    (1usize..=3, 1usize..=6, 1usize..=6).prop_flat_map(|(c, h, w)| {
        proptest::collection::vec(-10.0f64..10.0, c * h * w)
            .prop_map(move |data| LatentGrid::new(c, h, w, data).unwrap())
    })
}

fn grid_pair() -> impl Strategy<Value = (LatentGrid<f64>, LatentGrid<f64>)> {
    (1usize..=3, 1usize..=6, 1usize..=6).prop_flat_map(|(c, h, w)| {
        let n = c * h * w;
        (
            proptest::collection::vec(-10.0f64..10.0, n),
            proptest::collection::vec(-10.0f64..10.0, n),
        )
            .prop_map(move |(a, b)| {
                (
                    LatentGrid::new(c, h, w, a).unwrap(),
                    LatentGrid::new(c, h, w, b).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn masked_blend_is_elementwise_selection((x, xr) in grid_pair(), seed in 0u64..1000) {
        let (_, h, w) = x.shape();
        let mut rng = sargd_core::RngStream::new(seed, 0);
        let mask = BinaryMask::from_fn(h, w, |_, _| rng.next_uniform() < 0.5);
        let out = rgr_refine(&x, &mask, &xr).unwrap();
        let (c, _, _) = x.shape();
        for ch in 0..c {
            for y in 0..h {
                for xx in 0..w {
                    let v = out.get(ch, y, xx);
                    if mask.get(y, xx) == 1 {
                        prop_assert_eq!(v, xr.get(ch, y, xx));
                    } else {
                        prop_assert_eq!(v, x.get(ch, y, xx));
                    }
                }
            }
        }
    }

    #[test]
    fn direct_sum_of_negation_is_zero(x in small_grid()) {
        let neg = x.map(|v| -v);
        let out = direct_sum_refine(&x, &neg).unwrap();
        prop_assert!(out.is_all_zero());
    }

    #[test]
    fn score_complement_sums_to_one_exactly(h in 1usize..8, w in 1usize..8, seed in 0u64..1000) {
        let mut rng = sargd_core::RngStream::new(seed, 1);
        let m = BinaryMask::from_fn(h, w, |_, _| rng.next_uniform() < 0.3);
        let s = reality_score(&m).value + reality_score(&m.invert()).value;
        prop_assert_eq!(s, 1.0);
        prop_assert!(reality_score(&m).value >= 0.0 && reality_score(&m).value <= 1.0);
    }

    #[test]
    fn mask_downscale_is_monotone(seed in 0u64..500) {
        let mut rng = sargd_core::RngStream::new(seed, 2);
        let base = BinaryMask::from_fn(8, 8, |_, _| rng.next_uniform() < 0.2);
        let mut grown = base.clone();
        for _ in 0..6 {
            let y = rng.next_range(0, 7) as usize;
            let x = rng.next_range(0, 7) as usize;
            grown.set(y, x, true);
        }
        let a = resize_mask_to_latent(&base, 4, 4).unwrap();
        let b = resize_mask_to_latent(&grown, 4, 4).unwrap();
        for (p, q) in a.bits().iter().zip(b.bits()) {
            prop_assert!(q >= p, "adding pixels must never clear a latent cell");
        }
    }

    #[test]
    fn forward_diffuse_preserves_shape_and_finiteness(
        (x, e) in grid_pair(),
        t in 1usize..=10,
    ) {
        let s: NoiseSchedule<f64> = NoiseSchedule::ddpm_rescaled(10).unwrap();
        let out = forward_diffuse(&x, t, &s, &e).unwrap();
        prop_assert_eq!(out.shape(), x.shape());
        prop_assert!(out.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn posterior_mean_interpolates_for_all_priors(
        x_val in -5.0f64..5.0,
        mu_val in -5.0f64..5.0,
        v in 1e-3f64..100.0,
        t in 1usize..=10,
    ) {
        let s: NoiseSchedule<f64> = NoiseSchedule::ddpm_rescaled(10).unwrap();
        let abar: f64 = s.alpha_bar(t).unwrap();
        let x_t = LatentGrid::filled(1, 1, 1, x_val);
        let cond = LatentGrid::filled(1, 1, 1, mu_val);
        let d = DenoiserSpec::analytic(v);
        let eh = predict_noise(&d, &x_t, &cond, t, &s).unwrap();
        let post = (x_val - (1.0 - abar).sqrt() * eh.data()[0]) / abar.sqrt();
        let (lo, hi) = if mu_val <= x_val / abar.sqrt() {
            (mu_val, x_val / abar.sqrt())
        } else {
            (x_val / abar.sqrt(), mu_val)
        };
        prop_assert!(post >= lo - 1e-9 && post <= hi + 1e-9, "post={post} lo={lo} hi={hi}");
    }

    #[test]
    fn identity_codec_round_trip_is_exact(h in 1usize..8, w in 1usize..8, seed in 0u64..500) {
        let mut rng = sargd_core::RngStream::new(seed, 3);
        let img = ImageRgb::from_fn(h, w, |_, _| {
            [rng.next_uniform(), rng.next_uniform(), rng.next_uniform()]
        });
        let codec = CodecSpec::identity();
        let back = decode(&encode(&img, &codec).unwrap(), &codec).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn pool2x_round_trip_exact_on_block_constant_images(
        bh in 1usize..4,
        bw in 1usize..4,
        v in 0.0f64..=1.0,
    ) {
        // block-constant = constant per 2x2 pool cell and across the
        // image: constants are fixed points of pool + bilinear
        let img: ImageRgb<f64> = ImageRgb::constant(2 * bh, 2 * bw, v).unwrap();
        let codec = CodecSpec::pool2x();
        let back = decode(&encode(&img, &codec).unwrap(), &codec).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn oracle_detector_end_to_end_identity(
        y in 0usize..4, x in 0usize..4,
        h in 1usize..=4, w in 1usize..=4,
    ) {
        // detection of oracle-injected artifacts equals the injected truth
        let art: ArtifactSpec<f64> = ArtifactSpec::new(
            vec![Rect::new(y, x, h, w)],
            ArtifactMode::Bias,
            1.0,
            (1, 10),
        ).unwrap();
        if y + h > 8 || x + w > 8 {
            return Ok(());
        }
        let truth = oracle_artifact_mask(&art, 8, 8).unwrap();
        let det = DetectorSpec::oracle(art, 8, 8);
        let img: ImageRgb<f64> = ImageRgb::constant(8, 8, 0.5).unwrap();
        let found = detect_artifacts(&det, &img, &img).unwrap();
        prop_assert_eq!(&found, &truth);
        let mr = reality_mask(&det, &img, &img).unwrap();
        for (a, b) in found.bits().iter().zip(mr.bits()) {
            prop_assert_eq!(a + b, 1);
        }
    }
}
