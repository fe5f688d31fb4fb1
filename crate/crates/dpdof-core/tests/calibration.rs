use dpdof_core::filter::gaussian_blur;
use dpdof_core::lens::{
    center_values, correct_disparity, depth_from_disparity, disparity_from_depth,
    exact_disparity_from_depth, fit_calibration, interpolate_calib, synth_dp_pair, Capture,
    DepthSpec, Distortion, LensParams, SceneSpec,
};
use dpdof_core::stereo::{compute_disparity, DisparityField, StereoParams};
use dpdof_core::{FieldKind, FieldMap, Image};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn texture(w: usize, h: usize, seed: u64, sigma: f32) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white = FieldMap::from_fn(w, h, FieldKind::Generic, |_, _| rng.random::<f32>());
    let b = gaussian_blur(&white, sigma);
    let m = b.mean() as f32;
    let sd = (b.data().iter().map(|v| (v - m) * (v - m)).sum::<f32>() / (w * h) as f32).sqrt();
    b.map(|v| 0.5 + 0.2 * (v - m) / sd).into_image()
}

fn measure(scene: &SceneSpec) -> DisparityField {
    let (pair, _) = synth_dp_pair(scene).unwrap();
    let (w, h) = pair.dims();
    compute_disparity(&pair, &StereoParams::default(), w, h).unwrap().1
}

fn quantiles(v: &[f32]) -> (f32, f32, f32) {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f32| s[((s.len() - 1) as f32 * p).round() as usize];
    (q(0.25), q(0.5), q(0.75))
}

fn std_of(v: &[f32]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().map(|&x| x as f64).sum::<f64>() / n;
    (v.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// Pixels at least one tile away from the border.
fn inner(field: &DisparityField, margin: usize) -> Vec<f32> {
    let (w, h) = field.dims();
    let mut v = Vec::new();
    for y in margin..h - margin {
        for x in margin..w - margin {
            v.push(field.disparity.get(x, y));
        }
    }
    v
}

#[test]
fn uniform_line_is_recovered_through_the_matcher() {
    // gain 1.2 at z = 3 gives S = -1.2 and I = 0.4. The depths are chosen
    // so every disparity is an integer, which the matcher resolves exactly.
    let lens = LensParams::with_gain(1.2, 3.0);
    let tex = texture(96, 80, 1, 1.5);
    let captures: Vec<Capture> = [0.5, 6.0 / 7.0, 3.0]
        .iter()
        .map(|&d| Capture {
            focus_distance: 3.0,
            target_depth: d,
            field: measure(&SceneSpec {
                texture: tex.clone(),
                depth: DepthSpec::Constant(d),
                lens,
                noise_sigma: 0.0,
                distortion: None,
                seed: 0,
            }),
        })
        .collect();
    let t = fit_calibration(&captures, 17, 13).unwrap();
    for (s, i) in t.slope.iter().zip(&t.intercept) {
        assert!((s + 1.2).abs() < 1e-3, "S {s}");
        assert!((i - 0.4).abs() < 1e-3, "I {i}");
    }
}

fn aberration(w: usize, h: usize) -> Distortion {
    let r2 = |x: usize, y: usize| {
        let u = (x as f32 - 0.5 * (w - 1) as f32) / (0.5 * w as f32);
        let v = (y as f32 - 0.5 * (h - 1) as f32) / (0.5 * h as f32);
        (u * u + v * v) / 2.0
    };
    Distortion {
        gain: FieldMap::from_fn(w, h, FieldKind::Generic, |x, y| 1.1 - 0.2 * r2(x, y)),
        offset: FieldMap::from_fn(w, h, FieldKind::Generic, |x, y| {
            0.3 - 0.6 * r2(x, y) + 0.05 * (x as f32 / w as f32)
        }),
    }
}

#[test]
fn aberration_correction_flattens_a_plane() {
    let (w, h) = (256, 192);
    let lens = LensParams::with_gain(-2.0, 1.0);
    let tex = texture(w, h, 2, 2.5);
    let dist = aberration(w, h);
    let scene = |d: f64, seed: u64| SceneSpec {
        texture: tex.clone(),
        depth: DepthSpec::Constant(d),
        lens,
        noise_sigma: 0.0,
        distortion: Some(dist.clone()),
        seed,
    };
    let captures: Vec<Capture> = [0.5, 2.0 / 3.0, 1.0, 2.0, 4.0]
        .iter()
        .enumerate()
        .map(|(k, &d)| Capture {
            focus_distance: 1.0,
            target_depth: d,
            field: measure(&scene(d, k as u64)),
        })
        .collect();
    let table = fit_calibration(&captures, 17, 13).unwrap();
    let maps = interpolate_calib(&table, 1.0, w, h);
    let (sc, ic) = center_values(&maps);
    let plane = measure(&scene(1.25, 99));
    let fixed = correct_disparity(&plane, &maps.slope, &maps.intercept, sc, ic).unwrap();
    let before = inner(&plane, 8);
    let after = inner(&fixed, 8);
    let (a0, m0, b0) = quantiles(&before);
    let (a1, m1, b1) = quantiles(&after);
    let (s0, s1) = (std_of(&before), std_of(&after));
    eprintln!("iqr {} -> {}, std {s0} -> {s1}, medians {m0} {m1}", b0 - a0, b1 - a1);
    assert!((b1 - a1) * 10.0 <= b0 - a0);
    assert!(s1 <= 0.1 * s0);
}

#[test]
fn ground_truth_fit_is_exact() {
    // Noise-free ground truth fields: the cell means are exact.
    let lens = LensParams::with_gain(-1.2, 2.5);
    let tex = Image::filled(64, 48, 1, 0.5);
    let captures: Vec<Capture> = [0.7, 1.3, 6.0]
        .iter()
        .map(|&d| {
            let (_, truth) = synth_dp_pair(&SceneSpec {
                texture: tex.clone(),
                depth: DepthSpec::Constant(d),
                lens,
                noise_sigma: 0.0,
                distortion: None,
                seed: 0,
            })
            .unwrap();
            Capture {
                focus_distance: 2.5,
                target_depth: d,
                field: truth,
            }
        })
        .collect();
    let t = fit_calibration(&captures, 4, 3).unwrap();
    for (s, i) in t.slope.iter().zip(&t.intercept) {
        assert!((s - 1.2).abs() < 1e-5, "{s}");
        assert!((i + 1.2 / 2.5).abs() < 1e-5, "{i}");
    }
}

#[test]
fn exact_and_approximate_disparity_ratio() {
    let lens = LensParams {
        focus_distance: 0.1,
        ..LensParams::default()
    };
    for &d in &[0.05, 0.2, 3.0] {
        let ratio = exact_disparity_from_depth(&lens, d).unwrap() / disparity_from_depth(&lens, d);
        // 1 / (1 - f/z) with f = 5 mm, z = 0.1 m.
        assert!((ratio - 1.0 / (1.0 - 0.05)).abs() < 1e-9, "{ratio}");
        assert!((ratio - 1.0526).abs() < 1e-4);
    }
}

proptest! {
    #[test]
    fn depth_round_trip(g in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], z in 0.2f64..10.0, d in 0.1f64..100.0) {
        let lens = LensParams::with_gain(g, z);
        let disp = disparity_from_depth(&lens, d);
        let back = depth_from_disparity(&lens, disp).unwrap();
        prop_assert!(((back - d) / d).abs() < 1e-9);
    }

    #[test]
    fn disparity_monotone_in_inverse_depth(g in 0.1f64..5.0, z in 0.2f64..10.0, a in 0.1f64..50.0, b in 0.1f64..50.0) {
        prop_assume!(a != b);
        let neg = LensParams::with_gain(-g, z);
        let (near, far) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(disparity_from_depth(&neg, near) > disparity_from_depth(&neg, far));
    }

    #[test]
    fn correction_twice_is_one_affine_map(
        d in -3.0f32..3.0, s in prop_oneof![-2.0f32..-0.2, 0.2f32..2.0], i in -1.0f32..1.0,
        sc in 0.2f64..2.0, ic in -1.0f64..1.0,
    ) {
        let field = DisparityField::uniform(3, 2, d, 1.0);
        let sm = FieldMap::filled(3, 2, s, FieldKind::Generic);
        let im = FieldMap::filled(3, 2, i, FieldKind::Generic);
        let once = correct_disparity(&field, &sm, &im, sc, ic).unwrap();
        let twice = correct_disparity(&once, &sm, &im, sc, ic).unwrap();
        // Composition of d -> ic + sc (d - i) / s with itself.
        let a = sc / s as f64;
        let b = ic - sc * i as f64 / s as f64;
        let expect = a * (a * d as f64 + b) + b;
        let got = twice.disparity.get(1, 1) as f64;
        prop_assert!((got - expect).abs() <= 1e-9_f64.max(1e-6 * expect.abs()) * 10.0);
    }
}
