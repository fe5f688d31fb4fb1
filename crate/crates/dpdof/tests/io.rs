use std::fs;

use dpdof::formats::{calib_from_json, calib_to_json, load_calib, load_noise_bank, save_calib, save_noise_bank};
use dpdof::io::{encode_f32m, load_field, load_image, save_image, save_image_png16};
use dpdof::Error;
use dpdof_core::bokeh::NoiseBank;
use dpdof_core::lens::CalibTable;
use dpdof_core::{ColorSpace, FieldKind, FieldMap, Image};
use proptest::prelude::*;
use tempfile::tempdir;

/// sRGB EOTF written out from the published piecewise definition.
fn reference_decode(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn reference_encode(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

#[test]
fn pgm_endpoints_load_as_zero_and_one() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("two.pgm");
    let mut bytes = b"P5\n2 1\n255\n".to_vec();
    bytes.extend_from_slice(&[0, 255]);
    fs::write(&path, bytes).unwrap();
    let img = load_image(&path, ColorSpace::Linear).unwrap();
    assert_eq!(img.dims(), (2, 1));
    assert_eq!(img.data(), &[0.0, 1.0]);
    let img = load_image(&path, ColorSpace::Srgb).unwrap();
    assert_eq!(img.data(), &[0.0, 1.0]);
}

#[test]
fn srgb_half_decodes_to_reference() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("mid.pgm");
    let mut bytes = b"P5\n1 1\n255\n".to_vec();
    bytes.push(128);
    fs::write(&path, bytes).unwrap();
    let v = load_image(&path, ColorSpace::Srgb).unwrap().data()[0] as f64;
    assert!((v - reference_decode(128.0 / 255.0)).abs() < 1e-6);
    assert!((reference_decode(0.5) - 0.2140).abs() < 1e-4);
}

#[test]
fn linear_rgb_png_round_trips_within_one_code() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("rgb.png");
    let img = Image::new(
        17,
        9,
        3,
        (0..17 * 9 * 3).map(|i| ((i * 37) % 101) as f32 / 100.0).collect(),
        ColorSpace::Linear,
    )
    .unwrap();
    save_image(&img, &path).unwrap();
    let back = load_image(&path, ColorSpace::Srgb).unwrap();
    assert_eq!(back.channels(), 3);
    assert_eq!(back.dims(), img.dims());
    for (a, b) in img.data().iter().zip(back.data()) {
        let ea = reference_encode(*a as f64);
        let eb = reference_encode(*b as f64);
        assert!((ea - eb).abs() <= 1.0 / 255.0 + 1e-6, "{a} {b}");
    }
}

#[test]
fn sixteen_bit_png_is_finer_than_eight() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("deep.png");
    let img = Image::from_fn(64, 1, |x, _| x as f32 / 63.0 * 0.01).to_rgb();
    save_image_png16(&img, &path).unwrap();
    let back = load_image(&path, ColorSpace::Srgb).unwrap();
    for (a, b) in img.data().iter().zip(back.data()) {
        assert!((a - b).abs() < 2e-5, "{a} {b}");
    }
}

#[test]
fn ppm_keeps_three_channels() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("c.ppm");
    let img = Image::new(2, 2, 3, vec![0.0, 0.2, 1.0, 1.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.1, 0.9, 0.3], ColorSpace::Srgb)
        .unwrap();
    save_image(&img, &path).unwrap();
    let back = load_image(&path, ColorSpace::Linear).unwrap();
    assert_eq!(back.channels(), 3);
    for (a, b) in img.data().iter().zip(back.data()) {
        assert!((a - b).abs() <= 0.5 / 255.0 + 1e-6);
    }
}

#[test]
fn grey_maps_are_stored_without_encoding() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("mask.png");
    let m = FieldMap::from_fn(5, 4, FieldKind::Mask, |x, y| ((x + y) % 2) as f32);
    save_image(&m.clone().into_image(), &path).unwrap();
    let back = load_field(&path, FieldKind::Mask, Some((5, 4))).unwrap();
    assert_eq!(back.data(), m.data());
    assert!(matches!(load_field(&path, FieldKind::Mask, Some((4, 5))), Err(Error::Format { .. })));
}

#[test]
fn truncated_f32m_is_rejected() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad.f32m");
    let img = Image::filled(4, 4, 1, 0.5);
    let mut bytes = encode_f32m(&img);
    bytes.truncate(bytes.len() - 4);
    fs::write(&path, bytes).unwrap();
    let err = load_image(&path, ColorSpace::Linear).unwrap_err();
    assert!(err.to_string().contains("4x4x1"), "{err}");
}

#[test]
fn unknown_format_is_rejected() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("x.bin");
    fs::write(&path, b"not an image at all").unwrap();
    assert!(load_image(&path, ColorSpace::Linear).is_err());
    assert!(save_image(&Image::filled(1, 1, 1, 0.0), dir.path().join("x.jpg")).is_err());
}

#[test]
fn f32m_header_layout() {
    let img = Image::new(3, 2, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], ColorSpace::Linear).unwrap();
    let b = encode_f32m(&img);
    assert_eq!(&b[..4], b"F32M");
    assert_eq!(&b[4..16], &[3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0]);
    assert_eq!(&b[16..20], &1.0f32.to_le_bytes());
    assert_eq!(b.len(), 16 + 24);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f32m_round_trip_is_bit_exact(
        w in 1usize..9,
        h in 1usize..9,
        c in 1usize..5,
        seed in any::<u64>(),
    ) {
        let mut s = seed;
        let data: Vec<f32> = (0..w * h * c)
            .map(|_| {
                s = s.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1);
                f32::from_bits((s >> 32) as u32 & 0x7f7f_ffff)
            })
            .collect();
        let img = Image::new(w, h, c, data, ColorSpace::Linear).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.f32m");
        save_image(&img, &path).unwrap();
        let back = load_image(&path, ColorSpace::Srgb).unwrap();
        prop_assert_eq!(back.dims(), img.dims());
        prop_assert_eq!(back.channels(), c);
        let a: Vec<u32> = img.data().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u32> = back.data().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(a, b);
    }
}

fn table() -> CalibTable {
    let n = 2 * 3 * 2;
    CalibTable {
        focus_distances: vec![0.5, 1.5],
        grid_w: 3,
        grid_h: 2,
        slope: (0..n).map(|i| -1.0 - i as f64 * 0.01).collect(),
        intercept: (0..n).map(|i| 0.1 * i as f64).collect(),
        residual_rms: vec![0.001; n],
    }
}

#[test]
fn calib_json_round_trip() {
    let t = table();
    let text = calib_to_json(&t);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["grid"], serde_json::json!([3, 2]));
    assert_eq!(v["S"].as_array().unwrap().len(), 12);
    assert_eq!(v["I"].as_array().unwrap().len(), 12);
    let dir = tempdir().unwrap();
    let path = dir.path().join("t.json");
    save_calib(&t, &path).unwrap();
    assert_eq!(load_calib(&path).unwrap(), t);
}

#[test]
fn calib_json_without_residual_and_with_errors() {
    let p = std::path::Path::new("t.json");
    let ok = r#"{"focus_distances":[1.0],"grid":[2,2],"S":[1,1,1,1],"I":[0,0,0,0]}"#;
    let t = calib_from_json(ok, p).unwrap();
    assert!(t.residual_rms.is_empty());
    let short = r#"{"focus_distances":[1.0],"grid":[2,2],"S":[1,1,1],"I":[0,0,0,0]}"#;
    assert!(calib_from_json(short, p).is_err());
    let mixed = r#"{"focus_distances":[1.0],"grid":[2,2],"S":[1,-1,1,1],"I":[0,0,0,0]}"#;
    assert!(calib_from_json(mixed, p).is_err());
}

#[test]
fn noise_bank_round_trip() {
    let bank = NoiseBank {
        patches: vec![
            FieldMap::from_fn(3, 3, FieldKind::Generic, |x, y| (x * 3 + y) as f32 - 4.0),
            FieldMap::from_fn(5, 5, FieldKind::Generic, |x, y| (x as f32 - y as f32) * 0.25),
        ],
        periods: vec![3, 5],
    };
    let dir = tempdir().unwrap();
    save_noise_bank(&bank, dir.path()).unwrap();
    let back = load_noise_bank(dir.path()).unwrap();
    assert_eq!(back.periods, bank.periods);
    for (a, b) in back.patches.iter().zip(&bank.patches) {
        assert_eq!(a.data(), b.data());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("noise_bank.json")).unwrap()).unwrap();
    assert_eq!(manifest["periods"], serde_json::json!([3, 5]));
}
