use crate::filter::{erode, gaussian_blur};
use crate::image::{FieldKind, FieldMap, Image};
use crate::resample::{area_downsample, half_dims, resample_field, ResampleFilter};
use crate::Result;

use super::jbu::{joint_bilateral_upsample, JbuParams};
use super::solver::{BilateralParams, BilateralSolver, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskParams {
    /// Erosion window as a fraction of the larger image dimension.
    pub erosion_fraction: f32,
    /// Slope of the sigmoid that pushes the solved mask towards 0 or 1.
    pub sigmoid_slope: f32,
    /// Gaussian sigma applied after the sigmoid, in half-resolution pixels.
    pub blur_sigma: f32,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            erosion_fraction: 0.05,
            sigmoid_slope: 20.0,
            blur_sigma: 2.0,
        }
    }
}

/// Odd erosion window `round(fraction * max(w, h))`, at least 1.
pub fn erosion_size(width: usize, height: usize, fraction: f32) -> usize {
    let k = libm::roundf(fraction * width.max(height) as f32).max(1.0) as usize;
    if k % 2 == 0 {
        k + 1
    } else {
        k
    }
}

/// Confidence of a soft segmentation: `((M - 1/2) / (1/2))^2`, eroded so
/// that pixels near uncertain regions are also uncertain.
pub fn mask_confidence(mask: &FieldMap, fraction: f32) -> FieldMap {
    let (w, h) = mask.dims();
    let c = mask.map(|m| {
        let v = 2.0 * m - 1.0;
        v * v
    });
    erode(&c, erosion_size(w, h, fraction)).with_kind(FieldKind::Confidence)
}

#[inline]
pub fn mask_sigmoid(y: f32, slope: f32) -> f32 {
    1.0 / (1.0 + libm::expf(-slope * (y - 0.5)))
}

/// Snaps a coarse segmentation to the edges of `color`.
///
/// Works at half resolution: the mask is smoothed by the bilateral solver
/// with its own confidence, pushed towards 0/1 by a sigmoid, blurred
/// lightly and brought back to full resolution by joint bilateral
/// upsampling with `color` as the guide.
pub fn refine_mask(
    mask: &FieldMap,
    color: &Image,
    bilateral: &BilateralParams,
    params: &MaskParams,
    jbu: &JbuParams,
) -> Result<(FieldMap, SolveReport)> {
    mask.ensure_dims(color.dims())?;
    let (w, h) = color.dims();
    let conf = mask_confidence(mask, params.erosion_fraction);
    let (hw, hh) = half_dims(w, h);
    let m_half = resample_field(mask, hw, hh, ResampleFilter::Box2x);
    let c_half = resample_field(&conf, hw, hh, ResampleFilter::Box2x);
    let g_half = area_downsample(color, hw, hh);
    let solver = BilateralSolver::new(&g_half, bilateral)?;
    let (y, report) = solver.solve(&m_half, &c_half)?;
    let pushed = y.map(|v| mask_sigmoid(v, params.sigmoid_slope));
    let blurred = gaussian_blur(&pushed, params.blur_sigma);
    let up = joint_bilateral_upsample(&blurred, color, jbu)?;
    Ok((up.map(|v| v.clamp(0.0, 1.0)).with_kind(FieldKind::Mask), report))
}
