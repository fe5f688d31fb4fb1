//! Synthetic scenes for tests and demos, described in TOML.
//!
//! ```toml
//! width = 256
//! height = 192
//! dp_scale = 2
//! focus_distance = 1.0
//! gain = -2.0
//! background_depth = 3.0
//!
//! [person]
//! rect = [80, 40, 176, 192]
//! depth = 1.0
//! ```
//!
//! A scene produces a linear RGB colour image, the DP pair at
//! `1/dp_scale` of its size, the true disparity and, with a person, a binary
//! mask. Optional sections add a plane-sweep suite (`sweep`) and a set of
//! calibration captures with a manifest (`calibration`, `distortion`).

use std::fs;
use std::path::{Path, PathBuf};

use dpdof_core::filter::gaussian_blur;
use dpdof_core::lens::{depth_from_disparity, synth_dp_pair, DepthSpec, Distortion, LensParams, SceneSpec};
use dpdof_core::resample::area_downsample;
use dpdof_core::stereo::{DisparityField, DpPair};
use dpdof_core::{ColorSpace, FieldKind, FieldMap, Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::save_image;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonSpec {
    /// `[x0, y0, x1, y1]` in colour pixels, half-open.
    pub rect: [usize; 4],
    pub depth: f64,
    /// Face rectangle; the top quarter of `rect` when absent.
    #[serde(default)]
    pub face: Option<[usize; 4]>,
}

impl PersonSpec {
    pub fn face_rect(&self) -> [usize; 4] {
        self.face.unwrap_or_else(|| {
            let [x0, y0, x1, y1] = self.rect;
            let fw = (x1 - x0) / 3;
            let cx = (x0 + x1) / 2;
            [cx - fw / 2, y0 + (y1 - y0) / 16, cx + fw / 2, y0 + (y1 - y0) / 4]
        })
    }
}

/// `gain = g0 + g2 r^2`, `offset = o0 + o2 r^2 + ox (x / (w - 1) - 1/2)`
/// with `r^2 = (u^2 + v^2) / 2` over centred coordinates `u, v` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionSpec {
    pub gain: [f64; 2],
    pub offset: [f64; 3],
}

impl DistortionSpec {
    pub fn gain_at(&self, x: usize, y: usize, w: usize, h: usize) -> f64 {
        self.gain[0] + self.gain[1] * radius2(x, y, w, h)
    }

    pub fn offset_at(&self, x: usize, y: usize, w: usize, h: usize) -> f64 {
        let t = if w > 1 { x as f64 / (w - 1) as f64 - 0.5 } else { 0.0 };
        self.offset[0] + self.offset[1] * radius2(x, y, w, h) + self.offset[2] * t
    }

    pub fn fields(&self, w: usize, h: usize) -> Distortion {
        Distortion {
            gain: FieldMap::from_fn(w, h, FieldKind::Generic, |x, y| self.gain_at(x, y, w, h) as f32),
            offset: FieldMap::from_fn(w, h, FieldKind::Generic, |x, y| self.offset_at(x, y, w, h) as f32),
        }
    }
}

fn radius2(x: usize, y: usize, w: usize, h: usize) -> f64 {
    let c = |p: usize, n: usize| if n > 1 { 2.0 * p as f64 / (n - 1) as f64 - 1.0 } else { 0.0 };
    let (u, v) = (c(x, w), c(y, h));
    0.5 * (u * u + v * v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub focus_distances: Vec<f64>,
    pub depths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    /// Colour image size.
    pub width: usize,
    pub height: usize,
    #[serde(default = "one")]
    pub dp_scale: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise_sigma: f32,
    /// Gaussian sigma of the random texture in colour pixels.
    #[serde(default = "default_texture_sigma")]
    pub texture_sigma: f32,
    #[serde(default = "one_f")]
    pub focus_distance: f64,
    /// DP pixels of disparity per diopter.
    #[serde(default = "default_gain")]
    pub gain: f64,
    /// Depth of the background plane; the focus distance when absent.
    #[serde(default)]
    pub background_depth: Option<f64>,
    #[serde(default)]
    pub person: Option<PersonSpec>,
    #[serde(default)]
    pub distortion: Option<DistortionSpec>,
    /// Constant disparities of a plane-sweep suite.
    #[serde(default)]
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub calibration: Option<CalibrationSpec>,
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

fn default_texture_sigma() -> f32 {
    1.5
}

fn default_gain() -> f64 {
    -2.0
}

impl SceneFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.dp_scale;
        if s == 0 || self.width == 0 || self.height == 0 || self.width % s != 0 || self.height % s != 0 {
            return Err(Error::Config(format!(
                "image size {}x{} must be a positive multiple of dp_scale {s}",
                self.width, self.height
            )));
        }
        if let Some(p) = &self.person {
            let [x0, y0, x1, y1] = p.rect;
            if !(x0 < x1 && y0 < y1 && x1 <= self.width && y1 <= self.height) {
                return Err(Error::Config(format!("person rectangle {:?} is empty or outside the image", p.rect)));
            }
        }
        Ok(())
    }

    pub fn lens(&self, focus_distance: f64) -> LensParams {
        LensParams::with_gain(self.gain, focus_distance)
    }

    pub fn dp_dims(&self) -> (usize, usize) {
        (self.width / self.dp_scale, self.height / self.dp_scale)
    }
}

/// Random texture with mean 0.5 and standard deviation 0.2.
pub fn random_texture(w: usize, h: usize, seed: u64, sigma: f32) -> FieldMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let white = FieldMap::from_fn(w, h, FieldKind::Generic, |_, _| rng.random::<f32>());
    let b = gaussian_blur(&white, sigma);
    let m = b.mean() as f32;
    let var = b.data().iter().map(|v| ((v - m) * (v - m)) as f64).sum::<f64>() / (w * h) as f64;
    let sd = var.sqrt() as f32;
    b.map(|v| 0.5 + 0.2 * (v - m) / sd)
}

const BACKGROUND_TINT: [f32; 3] = [0.35, 0.6, 0.95];
const PERSON_TINT: [f32; 3] = [0.95, 0.55, 0.3];

/// One synthesized capture.
#[derive(Debug, Clone)]
pub struct SynthScene {
    /// Linear RGB at the colour resolution.
    pub color: Image,
    pub pair: DpPair,
    /// True disparity at DP resolution.
    pub truth: DisparityField,
    pub mask: Option<FieldMap>,
    pub face: Option<[usize; 4]>,
}

fn in_rect(x: usize, y: usize, r: &[usize; 4]) -> bool {
    x >= r[0] && x < r[2] && y >= r[1] && y < r[3]
}

/// Colour image, person mask and DP-resolution depth of a scene.
fn layout(spec: &SceneFile) -> (Image, Option<FieldMap>, FieldMap) {
    let (w, h) = (spec.width, spec.height);
    let tex = random_texture(w, h, spec.seed, spec.texture_sigma);
    let person = spec.person.as_ref();
    let inside = |x: usize, y: usize| person.is_some_and(|p| in_rect(x, y, &p.rect));
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let tint = if inside(x, y) { PERSON_TINT } else { BACKGROUND_TINT };
            let t = tex.get(x, y).clamp(0.0, 1.0);
            data.extend(tint.iter().map(|c| c * (0.15 + 0.8 * t)));
        }
    }
    let color = Image::new(w, h, 3, data, ColorSpace::Linear).expect("sized");
    let mask = person.map(|_| FieldMap::from_fn(w, h, FieldKind::Mask, |x, y| inside(x, y) as u8 as f32));
    let (dw, dh) = spec.dp_dims();
    let s = spec.dp_scale;
    let back = spec.background_depth.unwrap_or(spec.focus_distance);
    let depth = FieldMap::from_fn(dw, dh, FieldKind::Generic, |x, y| {
        // A DP pixel belongs to the person when its footprint centre does.
        match person {
            Some(p) if in_rect(x * s + s / 2, y * s + s / 2, &p.rect) => p.depth as f32,
            _ => back as f32,
        }
    });
    (color, mask, depth)
}

fn dp_texture(color: &Image, spec: &SceneFile) -> Image {
    let (dw, dh) = spec.dp_dims();
    area_downsample(&color.luma().into_image(), dw, dh)
}

/// Synthesizes the main capture of `spec`.
pub fn synthesize(spec: &SceneFile) -> Result<SynthScene> {
    spec.validate()?;
    let (color, mask, depth) = layout(spec);
    let scene = SceneSpec {
        texture: dp_texture(&color, spec),
        depth: DepthSpec::Map(depth),
        lens: spec.lens(spec.focus_distance),
        noise_sigma: spec.noise_sigma,
        distortion: spec.distortion.as_ref().map(|d| {
            let (dw, dh) = spec.dp_dims();
            d.fields(dw, dh)
        }),
        seed: spec.seed,
    };
    let (mut pair, truth) = synth_dp_pair(&scene)?;
    pair.scale_x = spec.dp_scale;
    pair.scale_y = spec.dp_scale;
    Ok(SynthScene {
        color,
        pair,
        truth,
        mask,
        face: spec.person.as_ref().map(|p| p.face_rect()),
    })
}

/// One fronto-parallel pair per entry of `spec.sweep`.
pub fn synthesize_sweep(spec: &SceneFile) -> Result<Vec<(f64, DpPair, DisparityField)>> {
    let (color, _, _) = layout(spec);
    let texture = dp_texture(&color, spec);
    let lens = spec.lens(spec.focus_distance);
    spec.sweep
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let scene = SceneSpec {
                texture: texture.clone(),
                depth: DepthSpec::Constant(depth_from_disparity(&lens, d)?),
                lens,
                noise_sigma: spec.noise_sigma,
                distortion: None,
                seed: spec.seed.wrapping_add(1 + k as u64),
            };
            let (pair, truth) = synth_dp_pair(&scene)?;
            Ok((d, pair, truth))
        })
        .collect()
}

/// A calibration capture of a textured fronto-parallel target.
#[derive(Debug, Clone)]
pub struct CalibCapture {
    pub focus_distance: f64,
    pub target_depth: f64,
    pub pair: DpPair,
}

pub fn synthesize_calibration(spec: &SceneFile) -> Result<Vec<CalibCapture>> {
    let Some(cal) = &spec.calibration else {
        return Ok(Vec::new());
    };
    let (color, _, _) = layout(spec);
    let texture = dp_texture(&color, spec);
    let (dw, dh) = spec.dp_dims();
    let distortion = spec.distortion.as_ref().map(|d| d.fields(dw, dh));
    let mut out = Vec::new();
    for &z in &cal.focus_distances {
        for &depth in &cal.depths {
            let scene = SceneSpec {
                texture: texture.clone(),
                depth: DepthSpec::Constant(depth),
                lens: spec.lens(z),
                noise_sigma: spec.noise_sigma,
                distortion: distortion.clone(),
                seed: spec.seed.wrapping_add(out.len() as u64 + 101),
            };
            let (pair, _) = synth_dp_pair(&scene)?;
            out.push(CalibCapture {
                focus_distance: z,
                target_depth: depth,
                pair,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SceneSummary {
    width: usize,
    height: usize,
    dp_scale: usize,
    focus_distance: f64,
    gain: f64,
    face: Option<[usize; 4]>,
    person_disparity: Option<f64>,
    background_disparity: f64,
}

/// Writes the scene into `dir` and returns the files written:
///
/// - `color.png` (8-bit sRGB) and `color.f32m` (linear),
/// - `left.f32m`, `right.f32m`, `truth.f32m` at DP resolution,
/// - `mask.png` with a person, `scene.json` with the face rectangle and
///   true disparities,
/// - `sweep_<k>/{left,right,truth}.f32m` per sweep entry,
/// - `calib/*.f32m` and `calib/manifest.txt` with a calibration section.
pub fn write_scene(spec: &SceneFile, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut written = Vec::new();
    let mut put_image = |img: &Image, path: PathBuf| -> Result<()> {
        save_image(img, &path)?;
        written.push(path);
        Ok(())
    };
    let scene = synthesize(spec)?;
    put_image(&scene.color, dir.join("color.png"))?;
    put_image(&scene.color, dir.join("color.f32m"))?;
    put_image(&scene.pair.left, dir.join("left.f32m"))?;
    put_image(&scene.pair.right, dir.join("right.f32m"))?;
    put_image(&scene.truth.disparity.clone().into_image(), dir.join("truth.f32m"))?;
    if let Some(m) = &scene.mask {
        put_image(&m.clone().into_image(), dir.join("mask.png"))?;
    }
    for (k, (_, pair, truth)) in synthesize_sweep(spec)?.into_iter().enumerate() {
        let sub = dir.join(format!("sweep_{k}"));
        fs::create_dir_all(&sub).map_err(Error::io(&sub))?;
        put_image(&pair.left, sub.join("left.f32m"))?;
        put_image(&pair.right, sub.join("right.f32m"))?;
        put_image(&truth.disparity.into_image(), sub.join("truth.f32m"))?;
    }
    let captures = synthesize_calibration(spec)?;
    if !captures.is_empty() {
        let sub = dir.join("calib");
        fs::create_dir_all(&sub).map_err(Error::io(&sub))?;
        let mut manifest = String::from("# focus_distance target_depth left right\n");
        for (k, c) in captures.iter().enumerate() {
            let (l, r) = (format!("cap{k:03}_left.f32m"), format!("cap{k:03}_right.f32m"));
            put_image(&c.pair.left, sub.join(&l))?;
            put_image(&c.pair.right, sub.join(&r))?;
            manifest.push_str(&format!("{} {} {l} {r}\n", c.focus_distance, c.target_depth));
        }
        let path = sub.join("manifest.txt");
        fs::write(&path, manifest).map_err(Error::io(&path))?;
        written.push(path);
    }
    let lens = spec.lens(spec.focus_distance);
    let summary = SceneSummary {
        width: spec.width,
        height: spec.height,
        dp_scale: spec.dp_scale,
        focus_distance: spec.focus_distance,
        gain: spec.gain,
        face: scene.face,
        person_disparity: spec
            .person
            .as_ref()
            .map(|p| dpdof_core::lens::disparity_from_depth(&lens, p.depth)),
        background_disparity: dpdof_core::lens::disparity_from_depth(
            &lens,
            spec.background_depth.unwrap_or(spec.focus_distance),
        ),
    };
    let path = dir.join("scene.json");
    fs::write(&path, serde_json::to_string_pretty(&summary).expect("serializes")).map_err(Error::io(&path))?;
    written.push(path);
    Ok(written)
}
