use crate::image::{FieldKind, Image};
use crate::resample::{area_downsample, area_downsample_weighted};
use crate::stereo::DisparityField;
use crate::{FieldMap, Result};

use super::jbu::{joint_bilateral_upsample, JbuParams};
use super::median::median3x3;
use super::solver::{BilateralParams, BilateralSolver, SolveReport};

/// Edge-aware densification of a confidence-weighted disparity field.
///
/// The field and the colour guide are area-averaged to `1/factor` of the
/// colour resolution (disparity weighted by confidence), smoothed by the
/// bilateral solver, cleaned by a 3x3 median and joint-bilateral upsampled
/// back to the colour resolution.
pub fn smooth_disparity(
    field: &DisparityField,
    color: &Image,
    factor: usize,
    bilateral: &BilateralParams,
    jbu: &JbuParams,
) -> Result<(FieldMap, SolveReport)> {
    let (w, h) = color.dims();
    let factor = factor.max(1);
    let (lw, lh) = (w.div_ceil(factor), h.div_ceil(factor));
    let (d, c) = area_downsample_weighted(&field.disparity, &field.confidence, lw, lh);
    let guide = area_downsample(color, lw, lh);
    let solver = BilateralSolver::new(&guide, bilateral)?;
    let (s, report) = solver.solve(&d, &c)?;
    let m = median3x3(&s);
    let up = joint_bilateral_upsample(&m, color, jbu)?;
    Ok((up.with_kind(FieldKind::Disparity), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_disparity_survives() {
        let color = Image::from_fn(64, 48, |x, y| ((x / 8 + y / 8) % 2) as f32 * 0.7).to_rgb();
        let d = FieldMap::filled(64, 48, -1.25, FieldKind::Disparity);
        let c = FieldMap::from_fn(64, 48, FieldKind::Confidence, |x, y| ((x * y) % 3) as f32 * 0.5);
        let f = DisparityField::new(d, c).unwrap();
        let (out, _) = smooth_disparity(&f, &color, 4, &BilateralParams::default(), &JbuParams::default()).unwrap();
        assert!(out.data().iter().all(|&v| (v + 1.25).abs() < 1e-4));
    }
}
