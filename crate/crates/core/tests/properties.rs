//! Invariants that must hold for arbitrary inputs, checked with proptest.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use bandex::audio_io::{read_wav, upsample_2x, write_wav, SampleRate, SignalBuffer};
use bandex::features::{apply_mask, FeatureMask, FeatureScaler, FeatureVector, FEATURE_DIM};
use bandex::filters::{default_inverse_band, design_inverse_irs, make_bandshape_filters, FrequencyResponse, DESIGN_GRID};
use bandex::highband::{extend_excitation, ExcitationConfig};
use bandex::lowband::{harmonic_ls_fit, synthesize_lowband, LowbandFrame};
use bandex::lpc::{
    analysis_filter, autocorrelation, condition, hanning_window, levinson_durbin, synthesis_filter, AnalysisConfig,
    FilterState, LpcModel,
};
use bandex::measure::tone_amplitude;
use bandex::pitch::{estimate_pitch, pitch_search, PitchWindow};
use bandex::predictors::codebook::nearest;
use bandex::predictors::codebook_associate;
use bandex::spectrum::{dct, envelope_to_lpc, lpc_to_envelope, spectral_distortion, spectral_distortion_points};

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

/// An AR(2)-coloured frame of 256 samples from a seed-free description.
fn coloured_frame(noise: &[f64], r: f64, theta: f64) -> Vec<f64> {
    let (a1, a2) = (2.0 * r * theta.cos(), -r * r);
    let mut y = vec![0.0; noise.len()];
    for n in 0..noise.len() {
        y[n] = noise[n] + if n >= 1 { a1 * y[n - 1] } else { 0.0 } + if n >= 2 { a2 * y[n - 2] } else { 0.0 };
    }
    y.iter().zip(hanning_window(y.len())).map(|(a, w)| a * w).collect()
}

fn conditioned_model(noise: &[f64], r: f64, theta: f64, order: usize) -> LpcModel {
    let a = AnalysisConfig::default();
    let rr = condition(&autocorrelation(&coloured_frame(noise, r, theta), order).unwrap(), a.noise_floor_alpha, a.lag_beta);
    levinson_durbin(&rr, order).unwrap().model
}

fn noise_256() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 256)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn wav_round_trip_is_exact(pcm in prop::collection::vec(any::<i16>(), 1..2000), wide in any::<bool>()) {
        let rate = if wide { SampleRate::Wide } else { SampleRate::Narrow };
        let x: Vec<f64> = pcm.iter().map(|&v| v as f64 / 32768.0).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav(&path, &SignalBuffer::new(x.clone(), rate).unwrap()).unwrap();
        let back = read_wav(&path).unwrap();
        prop_assert_eq!(back.sample_rate(), rate);
        prop_assert_eq!(back.samples(), x.as_slice());
    }

    #[test]
    fn upsampling_keeps_in_band_energy(tones in prop::collection::vec((100.0f64..3300.0, 0.05f64..0.3, -PI..PI), 1..4)) {
        let x: Vec<f64> = (0..2048)
            .map(|n| tones.iter().map(|(f, a, p)| a * (2.0 * PI * f * n as f64 / 8000.0 + p).cos()).sum())
            .collect();
        let up = upsample_2x(&SignalBuffer::new(x.clone(), SampleRate::Narrow).unwrap()).unwrap();
        let e_in: f64 = x[200..1848].iter().map(|v| v * v).sum::<f64>() / 1648.0;
        let e_up: f64 = up.samples()[400..3696].iter().map(|v| v * v).sum::<f64>() / 3296.0;
        prop_assert!((10.0 * (e_up / e_in).log10()).abs() <= 0.2);
    }

    #[test]
    fn inverse_design_is_symmetric_and_improves_with_order(a in 0.1f64..0.6, f in 0.5f64..4.0, p in -PI..PI, level in 0.2f64..3.0) {
        let g = FrequencyResponse::from_fn(DESIGN_GRID, |w| level * (1.0 + a * (f * w + p).sin())).unwrap();
        let band = default_inverse_band();
        let mut last = f64::INFINITY;
        for half in [10, 20, 30] {
            let h = design_inverse_irs(&g, half, band).unwrap();
            let taps = h.taps();
            prop_assert!((0..taps.len()).all(|i| taps[i] == taps[taps.len() - 1 - i]));
            let errs: Vec<f64> = (0..g.grid_size())
                .filter(|&j| g.omega(j) >= band.0 && g.omega(j) <= band.1)
                .map(|j| {
                    let w = g.omega(j);
                    let amp: f64 = taps.iter().enumerate().map(|(k, t)| t * ((k as f64 - half as f64) * w).cos()).sum();
                    amp - 1.0 / g.magnitudes()[j]
                })
                .collect();
            let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
            prop_assert!(rms <= last * (1.0 + 1e-9));
            last = rms;
        }
    }

    #[test]
    fn analysis_and_synthesis_invert_each_other(
        noise in noise_256(), r in 0.3f64..0.97, theta in 0.1f64..3.0, order in 1usize..=16,
        x in prop::collection::vec(-1.0f64..1.0, 64..600), block in 1usize..200,
    ) {
        let model = conditioned_model(&noise, r, theta, order);
        let (mut sa, mut ss) = (FilterState::new(order), FilterState::new(order));
        let (mut sb, mut sc) = (FilterState::new(order), FilterState::new(order));
        let (mut y, mut z) = (Vec::new(), Vec::new());
        for chunk in x.chunks(block) {
            y.extend(synthesis_filter(&analysis_filter(chunk, &model, &mut sa).unwrap(), &model, &mut ss).unwrap());
            z.extend(analysis_filter(&synthesis_filter(chunk, &model, &mut sb).unwrap(), &model, &mut sc).unwrap());
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for out in [&y, &z] {
            let err = x.iter().zip(out.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-9 * norm);
        }
    }

    #[test]
    fn levinson_matches_dense_solve(noise in noise_256(), r in 0.3f64..0.97, theta in 0.1f64..3.0, order in 1usize..=16) {
        let a = AnalysisConfig::default();
        let rr = condition(&autocorrelation(&coloured_frame(&noise, r, theta), order).unwrap(), a.noise_floor_alpha, a.lag_beta);
        let v = rr.values();
        let toeplitz = DMatrix::from_fn(order, order, |i, j| v[i.abs_diff(j)]);
        let dense = toeplitz.lu().solve(&DVector::from_iterator(order, v[1..=order].iter().copied())).unwrap();
        let sol = levinson_durbin(&rr, order).unwrap();
        for (x, y) in sol.model.coefficients().iter().zip(dense.iter()) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn conditioned_frames_are_stable_and_error_shrinks(
        frame in prop::collection::vec(-1e3f64..1e3, 17..300), scale in -8i32..8,
    ) {
        let x: Vec<f64> = frame.iter().map(|v| v * 10f64.powi(scale)).collect();
        prop_assume!(x.iter().any(|v| *v != 0.0));
        let a = AnalysisConfig::default();
        let rr = condition(&autocorrelation(&x, 16).unwrap(), a.noise_floor_alpha, a.lag_beta);
        let full = levinson_durbin(&rr, 16).unwrap();
        prop_assert!(full.reflection.iter().all(|k| k.abs() < 1.0));
        let mut last = rr.values()[0];
        for p in 1..=16 {
            let e = levinson_durbin(&rr, p).unwrap().error_energy;
            prop_assert!(e <= last * (1.0 + 1e-12));
            last = e;
        }
    }

    #[test]
    fn dct_preserves_inner_products(pair in (2usize..65).prop_flat_map(|n| (
        prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n)))) {
        let (x, y) = pair;
        let n = x.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
        let scale = 1.0 + dot(&x, &x).sqrt() * dot(&y, &y).sqrt();
        prop_assert!((dot(&dct(&x, n), &dct(&y, n)) - dot(&x, &y)).abs() <= 1e-10 * scale);
    }

    #[test]
    fn envelope_round_trip_stays_under_a_tenth_of_a_db(
        noise in noise_256(), r in 0.3f64..0.97, theta in 0.1f64..3.0, order in 1usize..=16,
    ) {
        let model = conditioned_model(&noise, r, theta, order);
        let env = lpc_to_envelope(&model, 64).unwrap();
        let back = lpc_to_envelope(&envelope_to_lpc(&env, order).unwrap(), 64).unwrap();
        prop_assert!(spectral_distortion(&env, &back, (0.0, 8000.0)).unwrap() <= 0.1);
    }

    #[test]
    fn spectral_distortion_is_a_metric(
        triple in (2usize..40).prop_flat_map(|n| (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n))),
    ) {
        let (a, b, c) = triple;
        let d = |x: &[f64], y: &[f64]| spectral_distortion_points(x, y).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-12);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!(a == b || d(&a, &b) > 0.0);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn pitch_is_scale_invariant_and_scores_reproduce(
        period in 40usize..300, noise in prop::collection::vec(-0.3f64..0.3, 960), c in 0.001f64..1000.0,
    ) {
        let x: Vec<f64> = noise.iter().enumerate().map(|(n, v)| v + if n % period == 0 { 1.0 } else { 0.0 }).collect();
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let (wx, wy) = (PitchWindow::new(&x, 320, 320).unwrap(), PitchWindow::new(&y, 320, 320).unwrap());
        let (ex, ey) = (pitch_search(&wx, (40, 320)).unwrap(), pitch_search(&wy, (40, 320)).unwrap());
        prop_assert_eq!(ex.period, ey.period);
        prop_assert!((ex.gain - ey.gain).abs() <= 1e-9 * (1.0 + ex.gain.abs()));
        prop_assert!((40..=320).all(|t| wx.score(t) <= ex.normalized_score));
        let refined = estimate_pitch(&wx, (40, 320), 0.85).unwrap();
        let again = wx.score(refined.period);
        prop_assert!((again - refined.normalized_score).abs() <= 1e-10 * (1.0 + again));
    }

    #[test]
    fn masks_are_idempotent_projections(v in prop::collection::vec(-5.0f64..5.0, FEATURE_DIM)) {
        let f = FeatureVector::from_slice(&v).unwrap();
        let mlp = apply_mask(&f, FeatureMask::Mlp);
        let mut re = vec![0.0; FEATURE_DIM];
        re[..11].copy_from_slice(&mlp[..11]);
        re[12..].copy_from_slice(&mlp[11..]);
        prop_assert_eq!(apply_mask(&FeatureVector::from_slice(&re).unwrap(), FeatureMask::Mlp), mlp);
        let reg = apply_mask(&f, FeatureMask::Regression);
        prop_assert_eq!(apply_mask(&FeatureVector::from_slice(&reg[..FEATURE_DIM]).unwrap(), FeatureMask::Regression), reg);
        let cb = apply_mask(&f, FeatureMask::Codebook);
        let mut re = vec![0.0; FEATURE_DIM];
        re[..10].copy_from_slice(&cb[..10]);
        re[10] = cb[10] / 4.0;
        re[12] = cb[11];
        prop_assert_eq!(apply_mask(&FeatureVector::from_slice(&re).unwrap(), FeatureMask::Codebook), cb);
    }

    #[test]
    fn codebook_prediction_is_brute_force_nearest(
        cells in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 8),
        data in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 3), -1.0f64..1.0), 8..60),
        queries in prop::collection::vec(prop::collection::vec(-4.0f64..4.0, 3), 1..20),
    ) {
        let x: Vec<Vec<f64>> = data.iter().map(|d| d.0.clone()).collect();
        let y: Vec<Vec<f64>> = data.iter().map(|d| vec![d.1]).collect();
        let book = codebook_associate(&cells, &x, &y).unwrap();
        for q in &queries {
            let d2 = |c: &Vec<f64>| c.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            let best = (0..cells.len()).fold(0, |b, i| if d2(&cells[i]) < d2(&cells[b]) { i } else { b });
            prop_assert_eq!(nearest(&cells, q).0, best);
            prop_assert_eq!(book.predict(q), book.output_codewords[best].clone());
        }
    }

    #[test]
    fn scaler_ignores_row_order(rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 4), 2..50), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (a, b) = (FeatureScaler::fit(&rows).unwrap(), FeatureScaler::fit(&shuffled).unwrap());
        for (u, v) in a.mean.iter().chain(&a.std).zip(b.mean.iter().chain(&b.std)) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn harmonic_fit_is_exact_in_model(f0 in 50.0f64..400.0, p in prop::array::uniform5(-2.0f64..2.0), len in 64usize..400) {
        let w = 2.0 * PI * f0 / 16000.0;
        let x: Vec<f64> = (0..len)
            .map(|n| {
                let t = w * n as f64;
                p[0] + p[1] * t.cos() + p[2] * t.sin() + p[3] * (2.0 * t).cos() + p[4] * (2.0 * t).sin()
            })
            .collect();
        let fit = harmonic_ls_fit(&x, w).unwrap();
        for (got, want) in [fit.g0, fit.g1, fit.h1, fit.g2, fit.h2].iter().zip(p) {
            prop_assert!((got - want).abs() <= 1e-6, "{} vs {}", got, want);
        }
    }

    #[test]
    fn steady_overlap_add_has_no_ripple(f0 in 80.0f64..300.0, a1 in 0.1f64..2.0, phi in -PI..PI) {
        let w = 2.0 * PI * f0 / 16000.0;
        let frames: Vec<LowbandFrame> = (0..40)
            .map(|t| LowbandFrame { omega0: w, amplitudes: [a1, 0.0], phases: [Some(phi + w * (t * 128) as f64), None] })
            .collect();
        let y = synthesize_lowband(&frames, 256, 0, 41 * 128, None).unwrap();
        let amps: Vec<f64> = y[512..36 * 128].chunks_exact(320).map(|c| tone_amplitude(c, f0, 16000.0)).collect();
        let (lo, hi) = amps.iter().fold((f64::MAX, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        prop_assert!(20.0 * (hi / lo).log10() < 0.2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn excitation_extension_keeps_telephone_band_energy(
        noise in prop::collection::vec(-1.0f64..1.0, 8192), tilt in -0.8f64..0.8,
    ) {
        let coloured: Vec<f64> = noise.windows(2).map(|w| w[1] + tilt * w[0]).collect();
        let lp = make_bandshape_filters().lowpass_3500;
        let r = lp.filter(&coloured, true);
        let e = extend_excitation(&r, &ExcitationConfig::from_analysis(&AnalysisConfig::default()), &lp).unwrap();
        let band = |x: &[f64]| lp.filter(x, false).iter().map(|v| v * v).sum::<f64>();
        let ratio = band(&e) / band(&r);
        // coloured noise drifts up to about 3%; voiced input stays within 1% (acceptance)
        prop_assert!((ratio - 1.0).abs() <= 0.035, "ratio {}", ratio);
    }
}
