use std::fs;
use std::path::Path;

use dpdof::calibrate::{calibrate_manifest, parse_manifest};
use dpdof::config::Config;
use dpdof::formats::save_calib;
use dpdof::io::{load_field, load_image};
use dpdof::pipeline::WarningKind;
use dpdof::scene::{write_scene, SceneFile};
use dpdof::{run, Error, Mode, PipelineConfig};
use dpdof_core::edgeaware::FaceRect;
use dpdof_core::lens::CalibTable;
use dpdof_core::{ColorSpace, FieldKind};
use tempfile::tempdir;

fn scene(text: &str, dir: &Path) -> SceneFile {
    let s = SceneFile::from_toml(text).unwrap();
    write_scene(&s, dir).unwrap();
    s
}

const PERSON: &str = "width = 256\nheight = 192\ndp_scale = 2\nseed = 3\nnoise_sigma = 0.01\n\
                      background_depth = 3.0\n[person]\nrect = [80, 40, 176, 192]\ndepth = 1.0\n";

fn dp_config(dir: &Path, out: &str) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(Mode::Dp, dir.join("color.f32m"), dir.join(out));
    cfg.dp_left = Some(dir.join("left.f32m"));
    cfg.dp_right = Some(dir.join("right.f32m"));
    cfg
}

fn dp_seg_config(dir: &Path, out: &str) -> PipelineConfig {
    let mut cfg = dp_config(dir, out);
    cfg.mode = Mode::DpSeg;
    cfg.mask = Some(dir.join("mask.png"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("scene.json")).unwrap()).unwrap();
    let f: Vec<usize> = summary["face"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    cfg.face = Some(FaceRect::new(f[0], f[1], f[2], f[3]).unwrap());
    cfg
}

#[test]
fn in_focus_plane_passes_through_unchanged() {
    let dir = tempdir().unwrap();
    scene(
        "width = 192\nheight = 128\nseed = 5\nnoise_sigma = 0.01\nfocus_distance = 1.5\nbackground_depth = 1.5\n",
        dir.path(),
    );
    let mut cfg = dp_config(dir.path(), "out.f32m");
    cfg.params.lens.focus_distance = 1.5;
    cfg.diagnostics = Some(dir.path().join("diag"));
    run(&cfg).unwrap();
    let radius = load_field(dir.path().join("diag/radius.f32m"), FieldKind::Radius, None).unwrap();
    assert!(radius.data().iter().all(|&r| r == 0.0));
    let input = load_image(dir.path().join("color.f32m"), ColorSpace::Linear).unwrap();
    let output = load_image(dir.path().join("out.f32m"), ColorSpace::Linear).unwrap();
    assert_eq!(input.data(), output.data());
}

#[test]
fn fused_interior_carries_the_face_disparity() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    let mut cfg = dp_seg_config(dir.path(), "out.png");
    cfg.diagnostics = Some(dir.path().join("diag"));
    let report = run(&cfg).unwrap();
    let d_face = report.d_face.unwrap();
    let fused = load_field(dir.path().join("diag/disparity_fused.f32m"), FieldKind::Disparity, None).unwrap();
    let mask = load_field(dir.path().join("mask.png"), FieldKind::Mask, None).unwrap();
    let mut interior = 0;
    for (d, m) in fused.data().iter().zip(mask.data()) {
        if *m > 0.94 {
            assert_eq!(*d, d_face);
            interior += 1;
        }
    }
    assert!(interior > 1000);
    // The person sits at the focus distance.
    assert!(d_face.abs() < 0.1, "{d_face}");
    for name in ["disparity_raw", "confidence", "disparity", "radius", "mask"] {
        assert!(dir.path().join(format!("diag/{name}.f32m")).exists(), "{name}");
        assert!(dir.path().join(format!("diag/{name}.png")).exists(), "{name}");
    }
}

#[test]
fn stage_times_account_for_the_run() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    let report = run(&dp_seg_config(dir.path(), "out.png")).unwrap();
    let names: Vec<&str> = report.stages.iter().map(|s| s.name).collect();
    for stage in ["load", "disparity", "fuse", "smooth", "focus", "blur", "composite", "noise", "encode"] {
        assert!(names.contains(&stage), "{stage} missing from {names:?}");
    }
    assert!(report.stages.iter().all(|s| s.ms >= 0.0));
    let sum = report.stage_sum_ms();
    assert!((sum - report.total_ms).abs() <= 0.05 * report.total_ms, "{sum} vs {}", report.total_ms);
    assert_eq!(report.outputs, vec![dir.path().join("out.png")]);
}

#[test]
fn thread_count_does_not_change_the_output() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    let mut outputs = Vec::new();
    for (k, threads) in [Some(1), Some(3), None].into_iter().enumerate() {
        let mut cfg = dp_seg_config(dir.path(), &format!("out{k}.f32m"));
        cfg.threads = threads;
        run(&cfg).unwrap();
        outputs.push(fs::read(dir.path().join(format!("out{k}.f32m"))).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn seg_mode_ignores_dual_pixel_inputs() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    let mut cfg = PipelineConfig::new(Mode::Seg, dir.path().join("color.png"), dir.path().join("seg.png"));
    cfg.mask = Some(dir.path().join("mask.png"));
    cfg.dp_left = Some(dir.path().join("missing_left.f32m"));
    cfg.dp_right = Some(dir.path().join("missing_right.f32m"));
    cfg.calib = Some(dir.path().join("missing.json"));
    run(&cfg).unwrap();
    assert!(dir.path().join("seg.png").exists());
}

#[test]
fn dp_mode_ignores_the_mask() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    let mut cfg = dp_config(dir.path(), "dp.png");
    cfg.mask = Some(dir.path().join("missing_mask.png"));
    run(&cfg).unwrap();
    assert!(dir.path().join("dp.png").exists());
}

#[test]
fn missing_inputs_are_reported_per_mode() {
    let cfg = PipelineConfig::new(Mode::Dp, "a.png", "b.png");
    assert!(matches!(run(&cfg), Err(Error::MissingInput { mode: "dp", .. })));
    let cfg = PipelineConfig::new(Mode::Seg, "a.png", "b.png");
    assert!(matches!(run(&cfg), Err(Error::MissingInput { what: "--mask", .. })));
    let mut cfg = PipelineConfig::new(Mode::DpSeg, "a.png", "b.png");
    cfg.dp_left = Some("l".into());
    cfg.dp_right = Some("r".into());
    cfg.mask = Some("m".into());
    assert!(matches!(run(&cfg), Err(Error::MissingInput { what: "--face or --tap", .. })));
}

#[test]
fn mismatched_mask_size_is_an_error() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    let small = SceneFile::from_toml("width = 64\nheight = 64\n[person]\nrect = [10, 10, 50, 64]\ndepth = 1.0\n").unwrap();
    let other = dir.path().join("other");
    write_scene(&small, &other).unwrap();
    let mut cfg = PipelineConfig::new(Mode::Seg, dir.path().join("color.png"), dir.path().join("x.png"));
    cfg.mask = Some(other.join("mask.png"));
    assert!(matches!(run(&cfg), Err(Error::Format { .. })));
}

const CALIBRATION: &str = "width = 768\nheight = 576\ndp_scale = 1\nnoise_sigma = 0.0\ntexture_sigma = 3.0\nseed = 9\n\
                           [distortion]\ngain = [1.1, -0.2]\noffset = [0.25, -0.5, 0.1]\n\
                           [calibration]\nfocus_distances = [1.0, 1.5]\ndepths = [20, 5.323, 3.07, 2.157, 1.663, 1.353, 1.14, 0.9852, 0.8674, 0.7748, 0.7]\n";

#[test]
fn calibration_recovers_the_injected_aberration() {
    let dir = tempdir().unwrap();
    let spec = scene(CALIBRATION, dir.path());
    let manifest = dir.path().join("calib/manifest.txt");
    assert_eq!(parse_manifest(&fs::read_to_string(&manifest).unwrap(), &manifest).unwrap().len(), 22);
    let (gw, gh) = (17, 13);
    let table = calibrate_manifest(&manifest, &Config::default().stereo.params(), gw, gh).unwrap();
    assert_eq!(table.focus_distances, vec![1.0, 1.5]);
    let dist = spec.distortion.as_ref().unwrap();
    let mut worst = 0.0f64;
    for (k, &z) in table.focus_distances.iter().enumerate() {
        for j in 0..gh {
            for i in 0..gw {
                // Control points sit on a uniform lattice spanning the image.
                let u = 2.0 * i as f64 / (gw - 1) as f64 - 1.0;
                let v = 2.0 * j as f64 / (gh - 1) as f64 - 1.0;
                let r2 = 0.5 * (u * u + v * v);
                let g = dist.gain[0] + dist.gain[1] * r2;
                let o = dist.offset[0] + dist.offset[1] * r2 + dist.offset[2] * (0.5 * (u + 1.0) - 0.5);
                // d = g * G * (1/z - 1/D) + o
                let s = -g * spec.gain;
                let icpt = g * spec.gain / z + o;
                let n = k * gw * gh + j * gw + i;
                worst = worst.max((table.slope[n] - s).abs()).max((table.intercept[n] - icpt).abs());
            }
        }
    }
    assert!(worst <= 1e-2, "worst table error {worst}");
}

fn single_focus_table() -> CalibTable {
    CalibTable {
        focus_distances: vec![1.0],
        grid_w: 2,
        grid_h: 2,
        slope: vec![2.0; 4],
        intercept: vec![-2.0; 4],
        residual_rms: Vec::new(),
    }
}

#[test]
fn single_focus_table_clamps_with_a_warning() {
    let dir = tempdir().unwrap();
    scene(PERSON, dir.path());
    save_calib(&single_focus_table(), dir.path().join("calib.json")).unwrap();
    let mut cfg = dp_config(dir.path(), "out.png");
    cfg.calib = Some(dir.path().join("calib.json"));
    let report = run(&cfg).unwrap();
    assert!(report.warnings.iter().all(|w| w.kind != WarningKind::CalibrationClamped));
    cfg.params.lens.focus_distance = 2.0;
    let report = run(&cfg).unwrap();
    let w: Vec<_> = report.warnings.iter().filter(|w| w.kind == WarningKind::CalibrationClamped).collect();
    assert_eq!(w.len(), 1);
    assert!(w[0].message.contains("clamped"));
}

#[test]
fn config_round_trips_and_rejects_unknown_keys() {
    let cfg = Config::default();
    let text = cfg.to_toml();
    assert_eq!(Config::from_toml(&text).unwrap(), cfg);
    let partial = Config::from_toml("[blur]\nd_null = 0.3\n").unwrap();
    assert_eq!(partial.blur.d_null, 0.3);
    assert_eq!(partial.blur.d_null_person, 0.19);
    assert!(Config::from_toml("[blur]\nd_nul = 0.3\n").is_err());
    assert!(Config::from_toml("[nonsense]\n").is_err());
}

#[test]
fn noise_bank_path_is_relative_to_the_config() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    fs::write(&path, "[noise]\nbank = \"tiles\"\nshot = 0.0\n").unwrap();
    let cfg = Config::load(&path).unwrap();
    assert_eq!(cfg.noise.bank.as_deref(), Some(dir.path().join("tiles").as_path()));
    assert_eq!(cfg.noise.shot, 0.0);
}
