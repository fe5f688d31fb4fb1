use dpdof_core::bokeh::{
    band_cutoffs, blur_radius, build_noise_bank, d_null, disk_norm, disk_weight, inject_noise,
    kappa, mask_blur_render, periodic_patch, render_layered, scatter_blur_brute,
    scatter_blur_gradient, vertical_ramp, BlurParams, NoiseBank, NoiseBankParams, BAND_COUNT,
};
use dpdof_core::{FieldKind, FieldMap, Image, RgbaImage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Direct scatter of every pixel onto the solid disk `dx² + dy² <= (r + 1/2)²`.
fn solid_disk_scatter(layer: &RgbaImage, radius: &FieldMap) -> Vec<[f64; 4]> {
    let (w, h) = layer.dims();
    let mut out = vec![[0.0f64; 4]; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let r = radius.get(x as usize, y as usize).max(0.0) as f64 + 0.5;
            let n = r.floor() as i64;
            let cells: Vec<(i64, i64)> = (-n..=n)
                .flat_map(|dy| (-n..=n).map(move |dx| (dx, dy)))
                .filter(|(dx, dy)| ((dx * dx + dy * dy) as f64) <= r * r)
                .collect();
            let v = layer.get(x as usize, y as usize);
            for (dx, dy) in &cells {
                let (tx, ty) = (x + dx, y + dy);
                if tx >= 0 && ty >= 0 && tx < w as i64 && ty < h as i64 {
                    let o = &mut out[(ty * w as i64 + tx) as usize];
                    for c in 0..4 {
                        o[c] += v[c] as f64 / cells.len() as f64;
                    }
                }
            }
        }
    }
    out
}

fn random_layer(w: usize, h: usize, rng: &mut ChaCha8Rng) -> RgbaImage {
    RgbaImage::from_fn(w, h, |_, _| {
        let a: f32 = rng.random();
        [a * rng.random::<f32>(), a * rng.random::<f32>(), a * rng.random::<f32>(), a]
    })
}

fn max_diff(a: &RgbaImage, b: &[[f64; 4]]) -> f64 {
    a.data
        .iter()
        .zip(b)
        .flat_map(|(p, q)| (0..4).map(move |c| (p[c] as f64 - q[c]).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn gradient_blur_matches_solid_disk_scatter_for_fixed_radii() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for &r in &[0.0f32, 1.0, 3.0, 7.0, 15.0] {
        let layer = random_layer(48, 40, &mut rng);
        let radius = FieldMap::filled(48, 40, r, FieldKind::Radius);
        let out = scatter_blur_gradient(&layer, &radius).unwrap();
        assert!(max_diff(&out, &solid_disk_scatter(&layer, &radius)) <= 1e-5, "r {r}");
    }
}

#[test]
fn single_pixel_radius_ten_is_a_uniform_disk() {
    let (w, h) = (41, 41);
    let mut layer = RgbaImage::zeros(w, h);
    layer.data[20 * w + 20] = [1.0; 4];
    let out = scatter_blur_gradient(&layer, &FieldMap::filled(w, h, 10.0, FieldKind::Radius)).unwrap();
    let inside = |x: i64, y: i64| (x - 20).pow(2) + (y - 20).pow(2) <= 110; // (10.5)^2 = 110.25
    let area = (0..h as i64).flat_map(|y| (0..w as i64).map(move |x| (x, y))).filter(|&(x, y)| inside(x, y)).count();
    for y in 0..h {
        for x in 0..w {
            let expect = if inside(x as i64, y as i64) { 1.0 / area as f32 } else { 0.0 };
            assert!((out.get(x, y)[0] - expect).abs() <= 1e-6);
        }
    }
}

#[test]
fn brute_single_pixel_is_antialiased_disk() {
    let (w, h) = (15, 15);
    let mut layer = RgbaImage::zeros(w, h);
    layer.data[7 * w + 7] = [0.5, 0.25, 1.0, 1.0];
    let out = scatter_blur_brute(&layer, &FieldMap::filled(w, h, 2.0, FieldKind::Radius)).unwrap();
    let mut norm = 0.0f64;
    for dy in -4i32..=4 {
        for dx in -4i32..=4 {
            norm += (2.5 - ((dx * dx + dy * dy) as f64).sqrt()).clamp(0.0, 1.0);
        }
    }
    assert!((disk_norm(2.0) as f64 - norm).abs() < 1e-5);
    for y in 0..h {
        for x in 0..w {
            let dist = (((x as f32 - 7.0).powi(2) + (y as f32 - 7.0).powi(2)) as f32).sqrt();
            let expect = disk_weight(2.0, dist) as f64 / norm;
            assert!((out.get(x, y)[3] as f64 - expect).abs() < 1e-6);
        }
    }
    let sums = out.channel_sums();
    for (s, v) in sums.iter().zip([0.5, 0.25, 1.0, 1.0]) {
        assert!((s - v).abs() < 1e-5);
    }
}

#[test]
fn constant_image_stays_constant_in_the_interior() {
    let layer = RgbaImage::from_fn(48, 48, |_, _| [0.2, 0.4, 0.6, 1.0]);
    for &r in &[1.5f32, 4.0, 9.0] {
        let radius = FieldMap::filled(48, 48, r, FieldKind::Radius);
        for out in [scatter_blur_brute(&layer, &radius).unwrap(), scatter_blur_gradient(&layer, &radius).unwrap()] {
            for y in 12..36 {
                for x in 12..36 {
                    let p = out.get(x, y);
                    assert!((p[1] - 0.4).abs() < 1e-5 && (p[3] - 1.0).abs() < 1e-5);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gradient_blur_matches_oracle_for_random_radii(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = random_layer(32, 28, &mut rng);
        let radius = FieldMap::from_fn(32, 28, FieldKind::Radius, |_, _| rng.random::<f32>() * 15.0);
        let out = scatter_blur_gradient(&layer, &radius).unwrap();
        prop_assert!(max_diff(&out, &solid_disk_scatter(&layer, &radius)) <= 1e-5);
    }

    #[test]
    fn blurs_conserve_energy(seed in 0u64..100_000, rmax in 0.5f32..12.0) {
        // Opaque content surrounded by a margin wider than any disk.
        let (w, h, pad) = (64usize, 56usize, 14usize);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = RgbaImage::from_fn(w, h, |x, y| {
            if x < pad || y < pad || x >= w - pad || y >= h - pad {
                [0.0; 4]
            } else {
                [rng.random(), rng.random(), rng.random(), 1.0]
            }
        });
        let radius = FieldMap::from_fn(w, h, FieldKind::Radius, |_, _| rng.random::<f32>() * rmax);
        let before = layer.channel_sums();
        for out in [scatter_blur_brute(&layer, &radius).unwrap(), scatter_blur_gradient(&layer, &radius).unwrap()] {
            let after = out.channel_sums();
            for c in 0..4 {
                prop_assert!((after[c] - before[c]).abs() <= 1e-4 * before[c]);
            }
        }
    }

    #[test]
    fn radius_is_continuous_with_a_flat_plateau(
        d_focus in -3.0f32..3.0, z in 0.3f64..20.0, person in any::<bool>(), d in -10.0f32..10.0,
    ) {
        let params = BlurParams {
            focus_distance: z,
            d_null_const: if person { 0.19 } else { 0.56 },
            ..BlurParams::default()
        };
        let k = kappa(z, d_focus as f64, params.scale);
        let dn = d_null(k, &params) as f32;
        let r = |v: f32| blur_radius(v, d_focus, k, &params);
        prop_assert!(r(d) >= 0.0 && r(d) <= params.r_max);
        if (d - d_focus).abs() <= dn * 0.999 {
            prop_assert_eq!(r(d), 0.0);
        }
        // Lipschitz with constant kappa: no jumps anywhere.
        let h = 1e-3f32;
        prop_assert!((r(d + h) - r(d)).abs() <= (k as f32) * h * 1.01 + 1e-4);
    }

    #[test]
    fn cutoffs_ascend_and_cover_the_range(
        a in -8.0f32..8.0, b in -8.0f32..8.0, f in -8.0f32..8.0, k in 0.5f64..10.0,
    ) {
        let (lo, hi) = (a.min(b).min(f), a.max(b).max(f));
        let c = band_cutoffs(lo, hi, f, k, &BlurParams::default());
        prop_assert!(c.values.windows(2).all(|p| p[0] < p[1]), "{:?}", c.values);
        let j = c.in_focus_index;
        prop_assert!(c.values[j] <= f && f <= c.values[j + 1]);
        // Outermost bands are open, so every disparity gets full weight somewhere.
        for t in 0..=20 {
            let d = lo + (hi - lo) * t as f32 / 20.0;
            let best = (0..BAND_COUNT).map(|j| c.alpha(j, d, 0.25)).fold(0.0f32, f32::max);
            prop_assert_eq!(best, 1.0);
        }
    }
}

#[test]
fn focused_scene_round_trips_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vals: Vec<f32> = (0..64 * 48 * 3).map(|_| rng.random()).collect();
    let color = Image::new(64, 48, 3, vals, dpdof_core::ColorSpace::Linear).unwrap();
    // Disparities inside the zero-blur plateau.
    let d = FieldMap::from_fn(64, 48, FieldKind::Disparity, |x, _| 0.1 * (x % 3) as f32 - 0.1);
    let (out, plan) = render_layered(&color, &d, 0.0, &BlurParams::default()).unwrap();
    assert!(plan.radius.data().iter().all(|&r| r == 0.0));
    assert_eq!(out.data(), color.data());
}

#[test]
fn mask_renderer_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let vals: Vec<f32> = (0..48 * 40 * 3).map(|_| rng.random()).collect();
    let img = Image::new(48, 40, 3, vals, dpdof_core::ColorSpace::Linear).unwrap();
    let full = FieldMap::filled(48, 40, 1.0, FieldKind::Mask);
    assert_eq!(mask_blur_render(&img, &full, 6.0, None).unwrap().data(), img.data());
    let empty = FieldMap::filled(48, 40, 0.0, FieldKind::Mask);
    let out = mask_blur_render(&img, &empty, 6.0, None).unwrap();
    for x in 0..48 {
        for c in 0..3 {
            assert_eq!(out.get(x, 39, c), img.get(x, 39, c));
        }
    }
    assert_eq!(vertical_ramp(39, 40), 0.0);
    assert_eq!(vertical_ramp(0, 40), 1.0);
}

fn gaussian_flat(n: usize, seed: u64) -> FieldMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.5f32, 0.05).unwrap();
    FieldMap::from_fn(n, n, FieldKind::Generic, |_, _| normal.sample(&mut rng))
}

#[test]
fn patches_tile_seamlessly_with_unit_statistics() {
    let params = NoiseBankParams::default();
    let bank = build_noise_bank(&[gaussian_flat(128, 1), gaussian_flat(128, 2)], &[61, 67, 73], &params).unwrap();
    for (p, &l) in bank.patches.iter().zip(&bank.periods) {
        let n = (l * l) as f64;
        let mean = p.data().iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = p.data().iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-3 && (var - 1.0).abs() < 1e-3);
    }
    for y in 0..3 * 61 {
        for x in 0..3 * 61 {
            let direct = 0.0f32
                + bank.patches[0].get(x % 61, y % 61)
                + bank.patches[1].get(x % 67, y % 67)
                + bank.patches[2].get(x % 73, y % 73);
            assert_eq!(bank.sample(x, y), direct);
        }
    }
    // Neighbours across a tile seam differ no more than neighbours inside.
    let (mut seam, mut ns, mut inner, mut ni) = (0.0f64, 0usize, 0.0f64, 0usize);
    for (p, &l) in bank.patches.iter().zip(&bank.periods) {
        for a in 0..l {
            for b in 0..l {
                let right = (p.get((b + 1) % l, a) - p.get(b, a)) as f64;
                let down = (p.get(a, (b + 1) % l) - p.get(a, b)) as f64;
                if b == l - 1 {
                    seam += right * right + down * down;
                    ns += 2;
                } else {
                    inner += right * right + down * down;
                    ni += 2;
                }
            }
        }
    }
    let (seam, inner) = (seam / ns as f64, inner / ni as f64);
    assert!(seam < 1.5 * inner, "seam {seam} interior {inner}");
}

#[test]
fn highpass_suppresses_low_frequencies() {
    let params = NoiseBankParams::default();
    let l = 61usize;
    let mut low = (0.0f64, 0usize);
    let mut high = (0.0f64, 0usize);
    let mut dc = 0.0f64;
    for seed in 0..4 {
        let p = periodic_patch(&gaussian_flat(128, 10 + seed), l, &params).unwrap();
        // Naive DFT of the periodic tile.
        for ky in 0..l {
            for kx in 0..l {
                let (mut re, mut im) = (0.0f64, 0.0f64);
                for y in 0..l {
                    for x in 0..l {
                        let ph = -2.0 * std::f64::consts::PI * ((kx * x + ky * y) as f64) / l as f64;
                        let v = p.get(x, y) as f64;
                        re += v * ph.cos();
                        im += v * ph.sin();
                    }
                }
                let pw = (re * re + im * im) / (l * l) as f64;
                let fx = kx.min(l - kx) as f64 / l as f64;
                let fy = ky.min(l - ky) as f64 / l as f64;
                let f = (fx * fx + fy * fy).sqrt();
                if kx == 0 && ky == 0 {
                    dc += pw;
                } else if f < 1.0 / (2.0 * std::f64::consts::PI * params.highpass_sigma as f64) {
                    low.0 += pw;
                    low.1 += 1;
                } else if f > 0.25 {
                    high.0 += pw;
                    high.1 += 1;
                }
            }
        }
    }
    let (low, high) = (low.0 / low.1 as f64, high.0 / high.1 as f64);
    assert!(dc < 1e-6, "dc {dc}");
    assert!(low < 0.25 * high, "low {low} high {high}");
}

#[test]
fn coprime_periods_repeat_only_jointly() {
    let params = NoiseBankParams::default();
    let bank = build_noise_bank(&[gaussian_flat(128, 3), gaussian_flat(128, 4)], &[61, 67], &params).unwrap();
    let row: Vec<f32> = (0..2 * 4087).map(|x| bank.sample(x, 5)).collect();
    assert!((0..4087).all(|x| row[x] == row[x + 4087]));
    for lag in [61usize, 67, 61 * 66, 67 * 60] {
        assert!((0..4087).any(|x| row[x] != row[x + lag]), "lag {lag}");
    }
}

#[test]
fn zero_sigma_noise_is_identity() {
    let params = NoiseBankParams::default();
    let bank: NoiseBank = build_noise_bank(&[gaussian_flat(128, 3)], &[61, 67], &params).unwrap();
    let img = Image::filled(30, 20, 3, 0.25);
    let zero = FieldMap::filled(30, 20, 0.0, FieldKind::Sigma);
    let one = FieldMap::filled(30, 20, 1.0, FieldKind::Mask);
    assert_eq!(inject_noise(&img, &zero, &one, &bank).unwrap().data(), img.data());
}
