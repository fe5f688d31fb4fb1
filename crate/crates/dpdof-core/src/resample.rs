//! Resampling between resolutions.

use alloc::vec::Vec;


use crate::image::{FieldMap, Image, RgbaImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleFilter {
    /// Edge-clamped bilinear interpolation with pixel-centre alignment.
    Bilinear,
    /// Mean of each 2x2 block (edge-clamped for odd sizes).
    Box2x,
}

/// Half-resolution size used by [`ResampleFilter::Box2x`].
#[inline]
pub fn half_dims(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(2), height.div_ceil(2))
}

/// Source coordinate of destination pixel `i` for a `src -> dst` resize.
#[inline]
fn src_coord(i: usize, src: usize, dst: usize) -> f32 {
    ((i as f32 + 0.5) * src as f32 / dst as f32 - 0.5).clamp(0.0, (src - 1) as f32)
}

/// Precomputed (index0, index1, frac) taps along one axis.
fn axis_taps(src: usize, dst: usize) -> Vec<(usize, usize, f32)> {
    (0..dst)
        .map(|i| {
            let s = src_coord(i, src, dst);
            let i0 = libm::floorf(s) as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f32)
        })
        .collect()
}

fn resample_planar(
    data: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    new_width: usize,
    new_height: usize,
    filter: ResampleFilter,
) -> Vec<f32> {
    assert!(new_width >= 1 && new_height >= 1);
    let mut out = Vec::with_capacity(new_width * new_height * channels);
    match filter {
        ResampleFilter::Bilinear => {
            let xt = axis_taps(width, new_width);
            let yt = axis_taps(height, new_height);
            for &(y0, y1, fy) in &yt {
                for &(x0, x1, fx) in &xt {
                    for c in 0..channels {
                        let p = |x: usize, y: usize| data[(y * width + x) * channels + c];
                        let top = p(x0, y0) + (p(x1, y0) - p(x0, y0)) * fx;
                        let bot = p(x0, y1) + (p(x1, y1) - p(x0, y1)) * fx;
                        out.push(top + (bot - top) * fy);
                    }
                }
            }
        }
        ResampleFilter::Box2x => {
            for y in 0..new_height {
                let y0 = (2 * y).min(height - 1);
                let y1 = (2 * y + 1).min(height - 1);
                for x in 0..new_width {
                    let x0 = (2 * x).min(width - 1);
                    let x1 = (2 * x + 1).min(width - 1);
                    for c in 0..channels {
                        let p = |x: usize, y: usize| data[(y * width + x) * channels + c];
                        out.push(0.25 * (p(x0, y0) + p(x1, y0) + p(x0, y1) + p(x1, y1)));
                    }
                }
            }
        }
    }
    out
}

/// Resizes an image. `Box2x` averages the 2x2 block anchored at `(2x, 2y)`
/// and is meant to be called with [`half_dims`].
pub fn resample(image: &Image, new_width: usize, new_height: usize, filter: ResampleFilter) -> Image {
    let data = resample_planar(
        image.data(),
        image.width(),
        image.height(),
        image.channels(),
        new_width,
        new_height,
        filter,
    );
    Image::new(new_width, new_height, image.channels(), data, image.colorspace())
        .expect("resample keeps channel count")
}

pub fn resample_field(
    field: &FieldMap,
    new_width: usize,
    new_height: usize,
    filter: ResampleFilter,
) -> FieldMap {
    let data = resample_planar(
        field.data(),
        field.width(),
        field.height(),
        1,
        new_width,
        new_height,
        filter,
    );
    FieldMap::from_vec(new_width, new_height, data, field.kind())
}

pub fn resample_rgba(image: &RgbaImage, new_width: usize, new_height: usize) -> RgbaImage {
    let flat: Vec<f32> = image.data.iter().flatten().copied().collect();
    let out = resample_planar(
        &flat,
        image.width,
        image.height,
        4,
        new_width,
        new_height,
        ResampleFilter::Bilinear,
    );
    RgbaImage {
        width: new_width,
        height: new_height,
        data: out
            .chunks_exact(4)
            .map(|c| [c[0], c[1], c[2], c[3]])
            .collect(),
    }
}

/// Edge-clamped bilinear sample at a continuous pixel position.
#[inline]
pub fn sample_bilinear(field: &FieldMap, x: f32, y: f32) -> f32 {
    let (w, h) = field.dims();
    let x = x.clamp(0.0, (w - 1) as f32);
    let y = y.clamp(0.0, (h - 1) as f32);
    let x0 = libm::floorf(x) as usize;
    let y0 = libm::floorf(y) as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f32;
    let fy = y - y0 as f32;
    let top = field.get(x0, y0) + (field.get(x1, y0) - field.get(x0, y0)) * fx;
    let bot = field.get(x0, y1) + (field.get(x1, y1) - field.get(x0, y1)) * fx;
    top + (bot - top) * fy
}

/// Edge-clamped linear sample along a row.
#[inline]
pub fn sample_row_linear(row: &[f32], x: f32) -> f32 {
    let n = row.len();
    let x = x.clamp(0.0, (n - 1) as f32);
    let x0 = libm::floorf(x) as usize;
    let x1 = (x0 + 1).min(n - 1);
    let f = x - x0 as f32;
    row[x0] + (row[x1] - row[x0]) * f
}

/// Area-averaging downsample of `values` weighted by `weights`.
///
/// Each destination pixel averages the source pixels whose centres fall in
/// its footprint. Returns the weighted mean values and the mean weights. A
/// footprint with zero total weight falls back to the unweighted mean.
pub fn area_downsample_weighted(
    values: &FieldMap,
    weights: &FieldMap,
    new_width: usize,
    new_height: usize,
) -> (FieldMap, FieldMap) {
    assert_eq!(values.dims(), weights.dims());
    let (w, h) = values.dims();
    let span = |i: usize, src: usize, dst: usize| {
        let a = (i * src) / dst;
        let b = (((i + 1) * src) / dst).max(a + 1).min(src);
        (a, b)
    };
    let mut out_v = Vec::with_capacity(new_width * new_height);
    let mut out_w = Vec::with_capacity(new_width * new_height);
    for y in 0..new_height {
        let (ya, yb) = span(y, h, new_height);
        for x in 0..new_width {
            let (xa, xb) = span(x, w, new_width);
            let (mut sv, mut sw, mut su, mut n) = (0.0f64, 0.0f64, 0.0f64, 0usize);
            for yy in ya..yb {
                for xx in xa..xb {
                    let v = values.get(xx, yy) as f64;
                    let c = weights.get(xx, yy) as f64;
                    sv += v * c;
                    sw += c;
                    su += v;
                    n += 1;
                }
            }
            let n = n.max(1) as f64;
            out_v.push(if sw > 0.0 { sv / sw } else { su / n } as f32);
            out_w.push((sw / n) as f32);
        }
    }
    (
        FieldMap::from_vec(new_width, new_height, out_v, values.kind()),
        FieldMap::from_vec(new_width, new_height, out_w, weights.kind()),
    )
}

/// Area-averaging downsample of an image (any integer or fractional ratio >= 1).
pub fn area_downsample(image: &Image, new_width: usize, new_height: usize) -> Image {
    let (w, h) = image.dims();
    let ch = image.channels();
    let span = |i: usize, src: usize, dst: usize| {
        let a = (i * src) / dst;
        let b = (((i + 1) * src) / dst).max(a + 1).min(src);
        (a, b)
    };
    let mut out = Vec::with_capacity(new_width * new_height * ch);
    for y in 0..new_height {
        let (ya, yb) = span(y, h, new_height);
        for x in 0..new_width {
            let (xa, xb) = span(x, w, new_width);
            let n = ((yb - ya) * (xb - xa)) as f32;
            for c in 0..ch {
                let mut s = 0.0f32;
                for yy in ya..yb {
                    for xx in xa..xb {
                        s += image.get(xx, yy, c);
                    }
                }
                out.push(s / n);
            }
        }
    }
    Image::new(new_width, new_height, ch, out, image.colorspace()).expect("consistent dims")
}
