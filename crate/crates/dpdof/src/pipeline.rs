//! The three rendering pipelines and their driver.
//!
//! - `dp`: disparity from the DP pair, optional calibration, edge-aware
//!   smoothing, focus selection and layered defocus.
//! - `seg`: mask refinement and a uniform background blur.
//! - `dp+seg`: `dp` with the person mask fused into the disparity before
//!   smoothing.
//!
//! Both end with synthetic noise on the blurred pixels. [`render`] works on
//! in-memory inputs; [`run`] adds loading, encoding and diagnostics and
//! reports wall times per stage.
//!
//! Stage names in [`RunReport`] map onto the usual timing breakdown as
//! follows: `disparity` is the stereo matcher, `calibrate` + `fuse` +
//! `smooth` the depth post-processing, `refine_mask` the segmentation
//! refinement, and `plan` + `blur` + `composite` + `noise` the renderer.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use dpdof_core::bokeh::{
    blur_layer, blur_weight_from_radius, build_noise_bank, finish_layers, inject_noise, mask_blur_render,
    noise_sigma_map, plan_layers, select_focus, vertical_ramp, NoiseBank,
};
use dpdof_core::edgeaware::{fuse_mask_disparity, refine_mask, smooth_disparity, FaceRect};
use dpdof_core::lens::{center_values, correct_disparity, interpolate_calib, CalibTable};
use dpdof_core::stereo::{compute_disparity, DisparityField, DpPair};
use dpdof_core::{ColorSpace, FieldKind, FieldMap, Image};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, NoiseSection};
use crate::error::{Error, Result};
use crate::formats::{load_calib, load_noise_bank};
use crate::io::{load_image, save_field, save_image, save_normalized_png};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum Mode {
    #[value(name = "dp")]
    #[serde(rename = "dp")]
    Dp,
    #[value(name = "seg")]
    #[serde(rename = "seg")]
    Seg,
    #[value(name = "dp+seg")]
    #[serde(rename = "dp+seg")]
    DpSeg,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Dp => "dp",
            Mode::Seg => "seg",
            Mode::DpSeg => "dp+seg",
        }
    }

    pub fn uses_dp(self) -> bool {
        self != Mode::Seg
    }

    pub fn uses_mask(self) -> bool {
        self != Mode::Dp
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Mode::Dp),
            "seg" => Ok(Mode::Seg),
            "dp+seg" => Ok(Mode::DpSeg),
            _ => Err(Error::Config(format!("unknown mode {s:?}; expected dp, seg or dp+seg"))),
        }
    }
}

/// Everything one `render` invocation needs.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub image: PathBuf,
    pub dp_left: Option<PathBuf>,
    pub dp_right: Option<PathBuf>,
    /// Colour pixels per DP pixel; inferred from the file sizes when unset.
    pub dp_scale: Option<(usize, usize)>,
    pub mask: Option<PathBuf>,
    pub face: Option<FaceRect>,
    pub tap: Option<(usize, usize)>,
    pub calib: Option<PathBuf>,
    pub output: PathBuf,
    pub diagnostics: Option<PathBuf>,
    /// Worker threads; the global pool when unset.
    pub threads: Option<usize>,
    pub params: Config,
}

impl PipelineConfig {
    pub fn new(mode: Mode, image: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            mode,
            image: image.into(),
            dp_left: None,
            dp_right: None,
            dp_scale: None,
            mask: None,
            face: None,
            tap: None,
            calib: None,
            output: output.into(),
            diagnostics: None,
            threads: None,
            params: Config::default(),
        }
    }

    /// Checks that the inputs the mode needs are present.
    pub fn validate(&self) -> Result<()> {
        let mode = self.mode.name();
        if self.mode.uses_dp() && (self.dp_left.is_none() || self.dp_right.is_none()) {
            return Err(Error::MissingInput {
                mode,
                what: "--dp-left and --dp-right",
            });
        }
        if self.mode.uses_mask() && self.mask.is_none() {
            return Err(Error::MissingInput { mode, what: "--mask" });
        }
        if self.mode == Mode::DpSeg && self.face.is_none() && self.tap.is_none() {
            return Err(Error::MissingInput {
                mode,
                what: "--face or --tap",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    CalibrationClamped,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTime {
    pub name: &'static str,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub stages: Vec<StageTime>,
    pub total_ms: f64,
    pub warnings: Vec<Warning>,
    pub outputs: Vec<PathBuf>,
    pub d_focus: Option<f32>,
    pub d_face: Option<f32>,
}

impl RunReport {
    pub fn stage_sum_ms(&self) -> f64 {
        self.stages.iter().map(|s| s.ms).sum()
    }

    pub fn has_nonconvergence(&self) -> bool {
        self.warnings.iter().any(|w| w.kind == WarningKind::NotConverged)
    }
}

/// Accumulates stage timings and warnings.
#[derive(Debug, Default)]
pub struct Stages {
    pub times: Vec<StageTime>,
    pub warnings: Vec<Warning>,
}

impl Stages {
    pub fn time<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.times.push(StageTime {
            name,
            ms: t.elapsed().as_secs_f64() * 1e3,
        });
        out
    }

    fn warn(&mut self, kind: WarningKind, message: String) {
        self.warnings.push(Warning { kind, message });
    }
}

/// In-memory inputs of [`render`]. The colour image is linear RGB.
#[derive(Debug, Clone)]
pub struct Frame {
    pub color: Image,
    pub dp: Option<DpPair>,
    pub mask: Option<FieldMap>,
    pub face: Option<FaceRect>,
    pub tap: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Rendered {
    /// Linear RGB at the colour resolution.
    pub image: Image,
    /// Named intermediate maps, in pipeline order.
    pub maps: Vec<(&'static str, FieldMap)>,
    pub d_focus: Option<f32>,
    pub d_face: Option<f32>,
}

impl Rendered {
    pub fn map(&self, name: &str) -> Option<&FieldMap> {
        self.maps.iter().find(|(n, _)| *n == name).map(|(_, m)| m)
    }
}

/// Noise bank from the configured directory, or synthesized from seeded
/// Gaussian flat fields.
pub fn noise_bank(cfg: &NoiseSection) -> Result<NoiseBank> {
    if let Some(dir) = &cfg.bank {
        return load_noise_bank(dir);
    }
    let n = cfg.patch_size;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let flats = (0..cfg.periods.len())
        .map(|_| {
            let data = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
            FieldMap::new(n, n, data, FieldKind::Generic)
        })
        .collect::<dpdof_core::Result<Vec<_>>>()?;
    Ok(build_noise_bank(&flats, &cfg.periods, &cfg.bank_params())?)
}

fn note_solver(stages: &mut Stages, what: &str, report: &dpdof_core::edgeaware::SolveReport) {
    if !report.converged {
        stages.warn(
            WarningKind::NotConverged,
            format!(
                "{what}: solver stopped after {} iterations at relative residual {:.3e}",
                report.iterations, report.residual
            ),
        );
    }
}

/// Region used for the face disparity: the face rectangle, else the focus
/// window around the tap.
fn fusion_region(frame: &Frame, cfg: &Config) -> Option<FaceRect> {
    if let Some(f) = frame.face {
        return Some(f);
    }
    let (tx, ty) = frame.tap?;
    let half = cfg.focus.tap_window / 2;
    FaceRect::new(
        tx.saturating_sub(half),
        ty.saturating_sub(half),
        tx + cfg.focus.tap_window - half,
        ty + cfg.focus.tap_window - half,
    )
    .ok()
}

fn render_seg(frame: &Frame, bank: &NoiseBank, cfg: &Config, stages: &mut Stages) -> Result<Rendered> {
    let color = &frame.color;
    let mask = frame.mask.as_ref().ok_or(Error::MissingInput {
        mode: "seg",
        what: "--mask",
    })?;
    mask.ensure_dims(color.dims())?;
    let (refined, report) = stages.time("refine_mask", || {
        refine_mask(mask, color, &cfg.bilateral.params(), &cfg.mask.params(), &cfg.jbu.params())
    })?;
    note_solver(stages, "mask refinement", &report);
    let blurred = stages.time("blur", || mask_blur_render(color, &refined, cfg.seg.radius, None))?;
    let image = stages.time("noise", || -> Result<Image> {
        let (w, h) = color.dims();
        let m_blur = FieldMap::from_fn(w, h, FieldKind::Mask, |x, y| {
            (vertical_ramp(y, h) * (1.0 - refined.get(x, y))).clamp(0.0, 1.0)
        });
        let sigma = noise_sigma_map(&blurred, cfg.noise.shot, cfg.noise.read);
        Ok(inject_noise(&blurred, &sigma, &m_blur, bank)?)
    })?;
    Ok(Rendered {
        image,
        maps: vec![("mask", refined)],
        d_focus: None,
        d_face: None,
    })
}

fn render_dp(mode: Mode, frame: &Frame, calib: Option<&CalibTable>, bank: &NoiseBank, cfg: &Config, stages: &mut Stages) -> Result<Rendered> {
    let color = &frame.color;
    let (w, h) = color.dims();
    let pair = frame.dp.as_ref().ok_or(Error::MissingInput {
        mode: mode.name(),
        what: "--dp-left and --dp-right",
    })?;
    let (dw, dh) = pair.dims();
    if (dw * pair.scale_x, dh * pair.scale_y) != (w, h) {
        return Err(dpdof_core::Error::DimensionMismatch {
            expected: (w, h),
            found: (dw * pair.scale_x, dh * pair.scale_y),
        }
        .into());
    }
    let mut maps = Vec::new();
    let (_, mut field) = stages.time("disparity", || compute_disparity(pair, &cfg.stereo.params(), w, h))?;
    maps.push(("disparity_raw", field.disparity.clone()));
    maps.push(("confidence", field.confidence.clone()));
    let z = cfg.lens.focus_distance;
    if let Some(table) = calib {
        let (corrected, clamped) = stages.time("calibrate", || -> Result<(DisparityField, bool)> {
            let m = interpolate_calib(table, z, w, h);
            let (sc, ic) = center_values(&m);
            Ok((correct_disparity(&field, &m.slope, &m.intercept, sc, ic)?, m.clamped))
        })?;
        if clamped {
            let (lo, hi) = (table.focus_distances[0], table.focus_distances[table.focus_distances.len() - 1]);
            stages.warn(
                WarningKind::CalibrationClamped,
                format!("focus distance {z} m outside the calibrated range [{lo}, {hi}] m; clamped"),
            );
        }
        field = corrected;
        maps.push(("disparity_corrected", field.disparity.clone()));
    }
    let mut d_face = None;
    if mode == Mode::DpSeg {
        let mask = frame.mask.as_ref().ok_or(Error::MissingInput {
            mode: "dp+seg",
            what: "--mask",
        })?;
        mask.ensure_dims((w, h))?;
        let region = fusion_region(frame, cfg).ok_or(Error::MissingInput {
            mode: "dp+seg",
            what: "--face or --tap",
        })?;
        let fusion = stages.time("fuse", || fuse_mask_disparity(&field, mask, &region, &cfg.fusion.params()))?;
        d_face = Some(fusion.d_face);
        field = fusion.field;
        maps.push(("mask", mask.clone()));
        maps.push(("disparity_fused", field.disparity.clone()));
    }
    let (smooth, report) = stages.time("smooth", || {
        smooth_disparity(&field, color, cfg.smooth.factor, &cfg.bilateral.params(), &cfg.jbu.params())
    })?;
    note_solver(stages, "disparity smoothing", &report);
    maps.push(("disparity", smooth.clone()));
    let d_focus = stages.time("focus", || select_focus(&smooth, frame.face.as_ref(), frame.tap, &cfg.focus.params()));
    let blur = cfg.blur.params(z, mode == Mode::DpSeg);
    let plan = stages.time("plan", || plan_layers(color, &smooth, d_focus, &blur))?;
    let blurred = stages.time("blur", || {
        (0..plan.stack.layers.len())
            .into_par_iter()
            .map(|j| blur_layer(&plan.stack, j))
            .collect::<dpdof_core::Result<Vec<_>>>()
    })?;
    let composed = stages.time("composite", || finish_layers(&plan, &blurred, color, &smooth))?;
    let image = stages.time("noise", || -> Result<Image> {
        let m_blur = blur_weight_from_radius(&plan.radius);
        let sigma = noise_sigma_map(&composed, cfg.noise.shot, cfg.noise.read);
        Ok(inject_noise(&composed, &sigma, &m_blur, bank)?)
    })?;
    maps.push(("radius", plan.radius.clone()));
    Ok(Rendered {
        image,
        maps,
        d_focus: Some(d_focus),
        d_face,
    })
}

/// Runs the pipeline of `mode` on in-memory inputs.
pub fn render(
    mode: Mode,
    frame: &Frame,
    calib: Option<&CalibTable>,
    bank: &NoiseBank,
    cfg: &Config,
    stages: &mut Stages,
) -> Result<Rendered> {
    if frame.color.channels() != 3 {
        return Err(dpdof_core::Error::ChannelMismatch {
            expected: 3,
            found: frame.color.channels(),
        }
        .into());
    }
    match mode {
        Mode::Seg => render_seg(frame, bank, cfg, stages),
        Mode::Dp | Mode::DpSeg => render_dp(mode, frame, calib, bank, cfg, stages),
    }
}

fn load_view(path: &PathBuf) -> Result<Image> {
    let img = load_image(path, ColorSpace::Linear)?;
    Ok(img.channel(0, FieldKind::Generic).into_image())
}

fn infer_scale(path: &PathBuf, color: (usize, usize), dp: (usize, usize)) -> Result<(usize, usize)> {
    if color.0 % dp.0 != 0 || color.1 % dp.1 != 0 {
        return Err(Error::format(
            path,
            format!(
                "DP size {}x{} does not divide the image size {}x{}",
                dp.0, dp.1, color.0, color.1
            ),
        ));
    }
    Ok((color.0 / dp.0, color.1 / dp.1))
}

fn load_frame(cfg: &PipelineConfig) -> Result<Frame> {
    let color = load_image(&cfg.image, ColorSpace::Srgb)?.to_rgb();
    let dims = color.dims();
    let dp = if cfg.mode.uses_dp() {
        let (lp, rp) = (cfg.dp_left.as_ref().unwrap(), cfg.dp_right.as_ref().unwrap());
        let left = load_view(lp)?;
        let right = load_view(rp)?;
        let (sx, sy) = match cfg.dp_scale {
            Some(s) => s,
            None => infer_scale(lp, dims, left.dims())?,
        };
        Some(DpPair::new(left, right, sx, sy)?)
    } else {
        None
    };
    let mask = if cfg.mode.uses_mask() {
        let path = cfg.mask.as_ref().unwrap();
        let m = crate::io::load_field(path, FieldKind::Mask, Some(dims))?;
        Some(m.map(|v| v.clamp(0.0, 1.0)).with_kind(FieldKind::Mask))
    } else {
        None
    };
    Ok(Frame {
        color,
        dp,
        mask,
        face: cfg.face,
        tap: cfg.tap,
    })
}

fn run_inner(cfg: &PipelineConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut stages = Stages::default();
    let (frame, calib, bank) = stages.time("load", || -> Result<_> {
        let frame = load_frame(cfg)?;
        let calib = match (&cfg.calib, cfg.mode.uses_dp()) {
            (Some(p), true) => Some(load_calib(p)?),
            _ => None,
        };
        Ok((frame, calib, noise_bank(&cfg.params.noise)?))
    })?;
    let rendered = render(cfg.mode, &frame, calib.as_ref(), &bank, &cfg.params, &mut stages)?;
    let mut outputs = Vec::new();
    stages.time("encode", || save_image(&rendered.image, &cfg.output))?;
    outputs.push(cfg.output.clone());
    if let Some(dir) = &cfg.diagnostics {
        stages.time("diagnostics", || -> Result<()> {
            std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
            for (name, map) in &rendered.maps {
                let raw = dir.join(format!("{name}.f32m"));
                let png = dir.join(format!("{name}.png"));
                save_field(map, &raw)?;
                save_normalized_png(map, &png)?;
                outputs.push(raw);
                outputs.push(png);
            }
            Ok(())
        })?;
    }
    Ok(RunReport {
        stages: stages.times,
        total_ms: start.elapsed().as_secs_f64() * 1e3,
        warnings: stages.warnings,
        outputs,
        d_focus: rendered.d_focus,
        d_face: rendered.d_face,
    })
}

/// Loads the inputs the mode needs (and nothing else), renders, writes the
/// output and optional diagnostics.
pub fn run(cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(|| run_inner(cfg))
        }
        None => run_inner(cfg),
    }
}
