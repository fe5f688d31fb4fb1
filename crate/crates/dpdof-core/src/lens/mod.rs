//! Thin-lens relations between depth, signed blur and DP disparity, the
//! spatially varying calibration that corrects for aberrations, and the
//! synthetic DP capture generator.

mod calibration;
mod synth;

pub use calibration::{
    center_values, correct_disparity, fit_calibration, interpolate_calib, CalibMaps, CalibTable,
    Capture,
};
pub use synth::{synth_dp_pair, synth_from_disparity, DepthSpec, Distortion, SceneSpec};

use crate::{Error, Result};

/// Thin-lens camera with a DP sensor.
///
/// `alpha` converts signed blur size into disparity; its sign fixes the
/// disparity convention. With a negative `alpha` scene points nearer than the
/// focus plane get positive disparity, which is what the renderer expects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensParams {
    /// Focal length `f` in meters.
    pub focal_length: f64,
    /// Aperture diameter `L` in meters.
    pub aperture: f64,
    pub alpha: f64,
    /// Focus distance `z` in meters.
    pub focus_distance: f64,
    /// Meters per DP pixel.
    pub pixel_pitch: f64,
}

impl Default for LensParams {
    fn default() -> Self {
        Self {
            focal_length: 5e-3,
            aperture: 2e-3,
            alpha: -0.5,
            focus_distance: 1.0,
            pixel_pitch: 1.4e-6,
        }
    }
}

impl LensParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.focal_length > 0.0
            && self.aperture > 0.0
            && self.pixel_pitch > 0.0
            && self.focus_distance > self.focal_length
            && self.alpha != 0.0
            && self.alpha.is_finite()
            && self.focus_distance.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!("invalid lens parameters {self:?}")))
        }
    }

    /// A lens whose bundle `alpha * L * f / pixel_pitch` equals `gain`,
    /// keeping the default focal length, aperture and pitch.
    pub fn with_gain(gain: f64, focus_distance: f64) -> Self {
        let base = Self {
            focus_distance,
            ..Self::default()
        };
        Self {
            alpha: gain * base.pixel_pitch / (base.aperture * base.focal_length),
            ..base
        }
    }

    /// `alpha * L * f / pixel_pitch`: DP pixels of disparity per diopter.
    pub fn gain(&self) -> f64 {
        self.alpha * self.aperture * self.focal_length / self.pixel_pitch
    }
}

/// Disparity in DP pixels of a point at depth `depth`, using the
/// small-`f/z` approximation `d = gain * (1/z - 1/D)`.
pub fn disparity_from_depth(lens: &LensParams, depth: f64) -> f64 {
    lens.gain() * (1.0 / lens.focus_distance - 1.0 / depth)
}

/// Inverse of [`disparity_from_depth`].
pub fn depth_from_disparity(lens: &LensParams, disparity: f64) -> Result<f64> {
    let g = lens.gain();
    let inv = 1.0 / lens.focus_distance - disparity / g;
    if !(inv > 0.0) || !inv.is_finite() {
        // Valid disparities lie strictly between -inf and gain/z on the
        // side that keeps 1/D positive.
        let limit = g / lens.focus_distance;
        let (min, max) = if g > 0.0 {
            (f64::NEG_INFINITY, limit)
        } else {
            (limit, f64::INFINITY)
        };
        return Err(Error::DisparityOutOfDomain { disparity, min, max });
    }
    Ok(1.0 / inv)
}

/// Signed blur diameter in meters from the exact thin-lens equations.
///
/// The image of a point at depth `D` forms at `D_i` with `1/D_i = 1/f - 1/D`;
/// the sensor sits at `z_i` with `1/z_i = 1/f - 1/z`. The blur is
/// `L (z_i - D_i) / D_i`, positive when the point focuses in front of the
/// sensor (points beyond the focus plane).
pub fn blur_diameter(lens: &LensParams, depth: f64) -> Result<f64> {
    let f = lens.focal_length;
    if !(depth > f) {
        return Err(Error::DepthTooSmall {
            depth,
            focal_length: f,
        });
    }
    let di = 1.0 / (1.0 / f - 1.0 / depth);
    let zi = 1.0 / (1.0 / f - 1.0 / lens.focus_distance);
    Ok(lens.aperture * (zi - di) / di)
}

/// Disparity from the exact blur diameter, `alpha * b / pixel_pitch`.
pub fn exact_disparity_from_depth(lens: &LensParams, depth: f64) -> Result<f64> {
    Ok(lens.alpha * blur_diameter(lens, depth)? / lens.pixel_pitch)
}
