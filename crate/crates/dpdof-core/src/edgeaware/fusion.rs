use alloc::vec::Vec;

use crate::image::FieldMap;
use crate::stereo::DisparityField;
use crate::{Error, Result};

/// Face rectangle in colour-image pixels, half-open: `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl FaceRect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Self> {
        if x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "empty face rectangle {x0},{y0},{x1},{y1}"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// The rectangle clipped to a `width x height` image, if anything remains.
    pub fn clamped(&self, width: usize, height: usize) -> Option<Self> {
        let r = Self {
            x0: self.x0.min(width),
            y0: self.y0.min(height),
            x1: self.x1.min(width),
            y1: self.y1.min(height),
        };
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }

    /// The rectangle mapped to a grid of different resolution.
    pub fn scaled(&self, from: (usize, usize), to: (usize, usize)) -> Self {
        let sx = |v: usize| (v * to.0).div_ceil(from.0.max(1));
        let fx = |v: usize| (v * to.0) / from.0.max(1);
        let sy = |v: usize| (v * to.1).div_ceil(from.1.max(1));
        let fy = |v: usize| (v * to.1) / from.1.max(1);
        Self {
            x0: fx(self.x0),
            y0: fy(self.y0),
            x1: sx(self.x1).max(fx(self.x0) + 1),
            y1: sy(self.y1).max(fy(self.y0) + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    /// Mask values strictly above this count as person interior.
    pub threshold: f32,
    /// Minimum confidence given to fused pixels.
    pub confidence_boost: f32,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            threshold: 0.94,
            confidence_boost: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fusion {
    pub field: DisparityField,
    pub d_face: f32,
    pub fused_pixels: usize,
}

/// Confidence-weighted mean disparity over the face rectangle, or the plain
/// mean when the rectangle carries no confidence.
pub fn face_disparity(field: &DisparityField, face: &FaceRect) -> Result<f32> {
    let (w, h) = field.dims();
    let r = face
        .clamped(w, h)
        .ok_or_else(|| Error::InvalidParameter("face rectangle lies outside the image".into()))?;
    let (mut sw, mut swd, mut sd, mut n) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for y in r.y0..r.y1 {
        for x in r.x0..r.x1 {
            let d = field.disparity.get(x, y) as f64;
            let c = field.confidence.get(x, y).max(0.0) as f64;
            sw += c;
            swd += c * d;
            sd += d;
            n += 1;
        }
    }
    Ok(if sw > 0.0 { swd / sw } else { sd / n as f64 } as f32)
}

/// Overwrites the disparity of every pixel whose mask value exceeds the
/// threshold with the face disparity and raises its confidence to at least
/// the boost value. All other pixels are left untouched.
pub fn fuse_mask_disparity(
    field: &DisparityField,
    mask: &FieldMap,
    face: &FaceRect,
    params: &FusionParams,
) -> Result<Fusion> {
    mask.ensure_dims(field.dims())?;
    let d_face = face_disparity(field, face)?;
    let mut out = field.clone();
    let inside: Vec<usize> = mask
        .data()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > params.threshold)
        .map(|(i, _)| i)
        .collect();
    {
        let d = out.disparity.data_mut();
        for &i in &inside {
            d[i] = d_face;
        }
    }
    let c = out.confidence.data_mut();
    for &i in &inside {
        c[i] = c[i].max(params.confidence_boost);
    }
    Ok(Fusion {
        field: out,
        d_face,
        fused_pixels: inside.len(),
    })
}
