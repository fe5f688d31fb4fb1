use crate::image::{FieldKind, FieldMap, Image, RgbaImage};
use crate::resample::resample_rgba;
use crate::{Error, Result};

use super::bands::BandCutoffs;

/// Below this alpha the composite is treated as empty and rendered black.
pub const UNPREMULTIPLY_EPS: f32 = 1e-4;

/// Premultiplied "over": `dst = src + (1 - src.alpha) * dst`.
pub fn over(dst: &mut RgbaImage, src: &RgbaImage) {
    assert_eq!(dst.dims(), src.dims());
    for (d, s) in dst.data.iter_mut().zip(&src.data) {
        let k = 1.0 - s[3];
        for c in 0..4 {
            d[c] = s[c] + k * d[c];
        }
    }
}

/// The full-resolution sharp layer: the colour image weighted by the tent
/// of the in-focus band, restricted to pixels that are not blurred. The
/// weight falls from 1 at zero radius to 0 at one full-resolution pixel, so
/// small non-zero radii inside the band keep their brute-force blur.
pub fn sharp_layer(
    color: &Image,
    disparity: &FieldMap,
    radius: &FieldMap,
    cutoffs: &BandCutoffs,
    eta_fraction: f32,
) -> RgbaImage {
    let j = cutoffs.in_focus_index;
    let alpha = FieldMap::from_fn(color.width(), color.height(), FieldKind::Mask, |x, y| {
        let r = radius.get(x, y);
        cutoffs.alpha(j, disparity.get(x, y), eta_fraction) * (1.0 - r).clamp(0.0, 1.0)
    });
    RgbaImage::premultiplied(color, &alpha)
}

/// Upsamples the blurred bands to `sharp`'s resolution and composites them
/// far to near, laying the sharp layer immediately over the in-focus band.
pub fn composite(blurred: &[RgbaImage], in_focus_index: usize, sharp: &RgbaImage) -> Result<RgbaImage> {
    if in_focus_index >= blurred.len() {
        return Err(Error::InvalidParameter("in-focus band index out of range".into()));
    }
    let (w, h) = sharp.dims();
    let mut acc = RgbaImage::zeros(w, h);
    for (j, layer) in blurred.iter().enumerate() {
        let up = if layer.dims() == (w, h) {
            layer.clone()
        } else {
            resample_rgba(layer, w, h)
        };
        over(&mut acc, &up);
        if j == in_focus_index {
            over(&mut acc, sharp);
        }
    }
    Ok(acc)
}
