use alloc::vec::Vec;

use crate::image::{FieldMap, Image};
use crate::resample::{area_downsample, sample_bilinear};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JbuParams {
    /// Spatial sigma in low-resolution pixels; the window spans
    /// `2 * ceil(sigma) + 1` taps per axis.
    pub sigma_spatial: f32,
    /// Range sigma on the guide's linear intensities.
    pub sigma_range: f32,
}

impl Default for JbuParams {
    fn default() -> Self {
        Self {
            sigma_spatial: 2.0,
            sigma_range: 0.1,
        }
    }
}

/// Joint bilateral upsampling of `low` to the resolution of `guide`.
///
/// Each output pixel averages the low-resolution samples around its
/// position, weighted by a spatial Gaussian and by the similarity between
/// its guide colour and the mean guide colour over each sample's footprint. Where all
/// weights vanish the result falls back to bilinear interpolation.
pub fn joint_bilateral_upsample(low: &FieldMap, guide: &Image, params: &JbuParams) -> Result<FieldMap> {
    let (lw, lh) = low.dims();
    let (w, h) = guide.dims();
    if lw > w || lh > h {
        return Err(Error::InvalidParameter(alloc::format!(
            "cannot upsample {lw}x{lh} to smaller guide {w}x{h}"
        )));
    }
    let sx = lw as f32 / w as f32;
    let sy = lh as f32 / h as f32;
    let r = libm::ceilf(params.sigma_spatial).max(0.0) as isize;
    let inv_s = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
    let ch = guide.channels();
    let inv_r = 1.0 / (2.0 * params.sigma_range * params.sigma_range * ch as f32);
    // Each low-resolution sample summarizes a footprint of the guide, so it
    // is compared against the mean guide colour of that footprint.
    let guide_low = area_downsample(guide, lw, lh);
    let gl = guide_low.data();
    let gd = guide.data();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let ly = (y as f32 + 0.5) * sy - 0.5;
        let cy = libm::roundf(ly) as isize;
        for x in 0..w {
            let lx = (x as f32 + 0.5) * sx - 0.5;
            let cx = libm::roundf(lx) as isize;
            let p = &gd[(y * w + x) * ch..(y * w + x + 1) * ch];
            let (mut acc, mut wsum) = (0.0f32, 0.0f32);
            for qy in (cy - r).max(0)..=(cy + r).min(lh as isize - 1) {
                let dy = qy as f32 - ly;
                let row = qy as usize * lw;
                for qx in (cx - r).max(0)..=(cx + r).min(lw as isize - 1) {
                    let dx = qx as f32 - lx;
                    let gi = (row + qx as usize) * ch;
                    let q = &gl[gi..gi + ch];
                    let dist: f32 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                    let wgt = libm::expf(-(dx * dx + dy * dy) * inv_s - dist * inv_r);
                    acc += wgt * low.get(qx as usize, qy as usize);
                    wsum += wgt;
                }
            }
            out.push(if wsum >= 1e-8 {
                acc / wsum
            } else {
                sample_bilinear(low, lx, ly)
            });
        }
    }
    Ok(FieldMap::from_vec(w, h, out, low.kind()))
}
