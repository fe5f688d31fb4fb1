//! Tunables of a pipeline run, read from a TOML file with one section per
//! stage. Every key is optional; a missing key takes the value the core
//! crate ships with.
//!
//! ```toml
//! [lens]
//! focus_distance = 1.2
//!
//! [blur]
//! scale = 5.0
//!
//! [noise]
//! shot = 2e-4
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use dpdof_core::bokeh::{BlurParams, FocusParams, NoiseBankParams, D_NULL_DEFAULT, D_NULL_PERSON};
use dpdof_core::edgeaware::{BilateralParams, FusionParams, JbuParams, MaskParams};
use dpdof_core::lens::LensParams;
use dpdof_core::stereo::StereoParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StereoSection {
    pub norm_window: usize,
    pub norm_epsilon: f32,
    pub tile_size: usize,
    pub search: usize,
    pub tau_grad: f32,
    pub tau_resid: f32,
    pub agree_scale: f32,
}

impl Default for StereoSection {
    fn default() -> Self {
        let p = StereoParams::default();
        Self {
            norm_window: p.norm_window,
            norm_epsilon: p.norm_epsilon,
            tile_size: p.tile_size,
            search: p.search,
            tau_grad: p.tau_grad,
            tau_resid: p.tau_resid,
            agree_scale: p.agree_scale,
        }
    }
}

impl StereoSection {
    pub fn params(&self) -> StereoParams {
        StereoParams {
            norm_window: self.norm_window,
            norm_epsilon: self.norm_epsilon,
            tile_size: self.tile_size,
            search: self.search,
            tau_grad: self.tau_grad,
            tau_resid: self.tau_resid,
            agree_scale: self.agree_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LensSection {
    pub focal_length: f64,
    pub aperture: f64,
    pub alpha: f64,
    pub focus_distance: f64,
    pub pixel_pitch: f64,
}

impl Default for LensSection {
    fn default() -> Self {
        let p = LensParams::default();
        Self {
            focal_length: p.focal_length,
            aperture: p.aperture,
            alpha: p.alpha,
            focus_distance: p.focus_distance,
            pixel_pitch: p.pixel_pitch,
        }
    }
}

impl LensSection {
    pub fn params(&self) -> LensParams {
        LensParams {
            focal_length: self.focal_length,
            aperture: self.aperture,
            alpha: self.alpha,
            focus_distance: self.focus_distance,
            pixel_pitch: self.pixel_pitch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibSection {
    /// Control lattice used by `calibrate`.
    pub grid_w: usize,
    pub grid_h: usize,
}

impl Default for CalibSection {
    fn default() -> Self {
        Self { grid_w: 17, grid_h: 13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilateralSection {
    pub sigma_spatial: f32,
    pub sigma_luma: f32,
    pub sigma_chroma: f32,
    pub lambda: f32,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub ridge: f64,
    pub bistochastic_iterations: usize,
}

impl Default for BilateralSection {
    fn default() -> Self {
        let p = BilateralParams::default();
        Self {
            sigma_spatial: p.sigma_spatial,
            sigma_luma: p.sigma_luma,
            sigma_chroma: p.sigma_chroma,
            lambda: p.lambda,
            max_iterations: p.max_iterations,
            tolerance: p.tolerance,
            ridge: p.ridge,
            bistochastic_iterations: p.bistochastic_iterations,
        }
    }
}

impl BilateralSection {
    pub fn params(&self) -> BilateralParams {
        BilateralParams {
            sigma_spatial: self.sigma_spatial,
            sigma_luma: self.sigma_luma,
            sigma_chroma: self.sigma_chroma,
            lambda: self.lambda,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            ridge: self.ridge,
            bistochastic_iterations: self.bistochastic_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub erosion_fraction: f32,
    pub sigmoid_slope: f32,
    pub blur_sigma: f32,
}

impl Default for MaskSection {
    fn default() -> Self {
        let p = MaskParams::default();
        Self {
            erosion_fraction: p.erosion_fraction,
            sigmoid_slope: p.sigmoid_slope,
            blur_sigma: p.blur_sigma,
        }
    }
}

impl MaskSection {
    pub fn params(&self) -> MaskParams {
        MaskParams {
            erosion_fraction: self.erosion_fraction,
            sigmoid_slope: self.sigmoid_slope,
            blur_sigma: self.blur_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JbuSection {
    pub sigma_spatial: f32,
    pub sigma_range: f32,
}

impl Default for JbuSection {
    fn default() -> Self {
        let p = JbuParams::default();
        Self {
            sigma_spatial: p.sigma_spatial,
            sigma_range: p.sigma_range,
        }
    }
}

impl JbuSection {
    pub fn params(&self) -> JbuParams {
        JbuParams {
            sigma_spatial: self.sigma_spatial,
            sigma_range: self.sigma_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothSection {
    /// Downsampling factor of the disparity solve relative to the colour image.
    pub factor: usize,
}

impl Default for SmoothSection {
    fn default() -> Self {
        Self { factor: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionSection {
    pub threshold: f32,
    pub confidence_boost: f32,
}

impl Default for FusionSection {
    fn default() -> Self {
        let p = FusionParams::default();
        Self {
            threshold: p.threshold,
            confidence_boost: p.confidence_boost,
        }
    }
}

impl FusionSection {
    pub fn params(&self) -> FusionParams {
        FusionParams {
            threshold: self.threshold,
            confidence_boost: self.confidence_boost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FocusSection {
    pub face_threshold: f32,
    pub tap_window: usize,
}

impl Default for FocusSection {
    fn default() -> Self {
        let p = FocusParams::default();
        Self {
            face_threshold: p.face_threshold,
            tap_window: p.tap_window,
        }
    }
}

impl FocusSection {
    pub fn params(&self) -> FocusParams {
        FocusParams {
            face_threshold: self.face_threshold,
            tap_window: self.tap_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlurSection {
    pub scale: f64,
    pub r_max: f32,
    pub r_brute: f32,
    pub eta_fraction: f32,
    pub frontal_factor: f64,
    /// `d_null * kappa` without a person mask.
    pub d_null: f64,
    /// `d_null * kappa` when a person mask is fused.
    pub d_null_person: f64,
}

impl Default for BlurSection {
    fn default() -> Self {
        let p = BlurParams::default();
        Self {
            scale: p.scale,
            r_max: p.r_max,
            r_brute: p.r_brute,
            eta_fraction: p.eta_fraction,
            frontal_factor: p.frontal_factor,
            d_null: D_NULL_DEFAULT,
            d_null_person: D_NULL_PERSON,
        }
    }
}

impl BlurSection {
    pub fn params(&self, focus_distance: f64, person: bool) -> BlurParams {
        BlurParams {
            scale: self.scale,
            r_max: self.r_max,
            r_brute: self.r_brute,
            eta_fraction: self.eta_fraction,
            frontal_factor: self.frontal_factor,
            d_null_const: if person { self.d_null_person } else { self.d_null },
            focus_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Shot-noise coefficient `a` of `sigma = sqrt(a * luma + b)`.
    pub shot: f32,
    /// Read-noise floor `b`.
    pub read: f32,
    /// Directory written by `noise-bank`; a bank is synthesized from
    /// seeded Gaussian flat fields when absent.
    pub bank: Option<PathBuf>,
    pub periods: Vec<usize>,
    pub patch_size: usize,
    pub highpass_sigma: f32,
    pub feather: usize,
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let p = NoiseBankParams::default();
        Self {
            shot: 1e-4,
            read: 1e-6,
            bank: None,
            periods: vec![61, 67, 73],
            patch_size: p.patch_size,
            highpass_sigma: p.highpass_sigma,
            feather: p.feather,
            seed: 0x5eed,
        }
    }
}

impl NoiseSection {
    pub fn bank_params(&self) -> NoiseBankParams {
        NoiseBankParams {
            patch_size: self.patch_size,
            highpass_sigma: self.highpass_sigma,
            feather: self.feather,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegSection {
    /// Uniform background blur radius of the segmentation-only renderer,
    /// in full-resolution pixels.
    pub radius: f32,
}

impl Default for SegSection {
    fn default() -> Self {
        Self { radius: 15.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub stereo: StereoSection,
    pub lens: LensSection,
    pub calib: CalibSection,
    pub bilateral: BilateralSection,
    pub mask: MaskSection,
    pub jbu: JbuSection,
    pub smooth: SmoothSection,
    pub fusion: FusionSection,
    pub focus: FocusSection,
    pub blur: BlurSection,
    pub noise: NoiseSection,
    pub seg: SegSection,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(bank), Some(dir)) = (&cfg.noise.bank, path.parent()) {
            if bank.is_relative() {
                cfg.noise.bank = Some(dir.join(bank));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
