use alloc::vec::Vec;

use super::bands::{band_cutoffs, decompose_layers, BandCutoffs, LayerStack};
use super::brute::scatter_blur_brute;
use super::composite::{composite, sharp_layer, UNPREMULTIPLY_EPS};
use super::gradient::scatter_blur_gradient;
use super::radius::{blur_radius_map, kappa, BlurParams};
use crate::image::{FieldKind, FieldMap, Image, RgbaImage};
use crate::resample::{half_dims, resample, resample_field, ResampleFilter};
use crate::{Error, Result};

/// Everything the layered renderer derives before blurring.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderPlan {
    pub kappa: f64,
    pub d_focus: f32,
    /// Full-resolution blur radius.
    pub radius: FieldMap,
    pub stack: LayerStack,
}

impl RenderPlan {
    pub fn cutoffs(&self) -> &BandCutoffs {
        &self.stack.cutoffs
    }
}

/// Radius map, band cutoffs and half-resolution layers for a linear RGB
/// image and its full-resolution disparity.
pub fn plan_layers(color: &Image, disparity: &FieldMap, d_focus: f32, params: &BlurParams) -> Result<RenderPlan> {
    if color.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            found: color.channels(),
        });
    }
    disparity.ensure_dims(color.dims())?;
    let k = kappa(params.focus_distance, d_focus as f64, params.scale);
    let radius = blur_radius_map(disparity, d_focus, k, params);
    let (lo, hi) = disparity.min_max();
    let cutoffs = band_cutoffs(lo.min(d_focus), hi.max(d_focus), d_focus, k, params);
    let (w, h) = color.dims();
    let (hw, hh) = half_dims(w, h);
    let color_w = resample(color, hw, hh, ResampleFilter::Box2x);
    let disp_w = resample_field(disparity, hw, hh, ResampleFilter::Box2x);
    let radius_w = resample_field(&radius, hw, hh, ResampleFilter::Box2x)
        .map(|r| 0.5 * r)
        .with_kind(FieldKind::Radius);
    let stack = decompose_layers(&color_w, &disp_w, &radius_w, &cutoffs, params.eta_fraction)?;
    Ok(RenderPlan {
        kappa: k,
        d_focus,
        radius,
        stack,
    })
}

/// Blurs band `j`: the in-focus band with the anti-aliased brute-force
/// kernel, every other band in the gradient domain.
pub fn blur_layer(stack: &LayerStack, j: usize) -> Result<RgbaImage> {
    let layer = stack
        .layers
        .get(j)
        .ok_or_else(|| Error::InvalidParameter(alloc::format!("no band {j}")))?;
    if j == stack.in_focus_index() {
        scatter_blur_brute(layer, &stack.radii)
    } else {
        scatter_blur_gradient(layer, &stack.radii)
    }
}

/// Composites blurred bands with the sharp in-focus layer and divides out
/// alpha. The result is linear RGB at the colour resolution.
pub fn finish_layers(plan: &RenderPlan, blurred: &[RgbaImage], color: &Image, disparity: &FieldMap) -> Result<Image> {
    let sharp = sharp_layer(color, disparity, &plan.radius, &plan.stack.cutoffs, plan.stack.eta_fraction);
    let acc = composite(blurred, plan.stack.in_focus_index(), &sharp)?;
    Ok(acc.unpremultiply(UNPREMULTIPLY_EPS).with_colorspace(color.colorspace()))
}

/// Single-threaded layered defocus rendering.
pub fn render_layered(color: &Image, disparity: &FieldMap, d_focus: f32, params: &BlurParams) -> Result<(Image, RenderPlan)> {
    let plan = plan_layers(color, disparity, d_focus, params)?;
    let blurred = (0..plan.stack.layers.len())
        .map(|j| blur_layer(&plan.stack, j))
        .collect::<Result<Vec<_>>>()?;
    let out = finish_layers(&plan, &blurred, color, disparity)?;
    Ok((out, plan))
}
