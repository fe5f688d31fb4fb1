//! Separable neighbourhood filters on single-channel maps. All windows are
//! edge-clamped.

use alloc::vec;
use alloc::vec::Vec;


use crate::image::FieldMap;

#[inline]
fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Sum over a `(2r+1)` window along rows, then along columns, in f64.
fn box_sum(data: &[f64], width: usize, height: usize, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut tmp = vec![0.0f64; width * height];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width {
            let mut s = 0.0;
            for dx in -r..=r {
                s += row[clamp_idx(x as isize + dx, width)];
            }
            tmp[y * width + x] = s;
        }
    }
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        for dy in -r..=r {
            let yy = clamp_idx(y as isize + dy, height);
            let src = &tmp[yy * width..(yy + 1) * width];
            let dst = &mut out[y * width..(y + 1) * width];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
    out
}

/// Local mean and standard deviation over a `window x window` neighbourhood.
pub fn local_mean_std(field: &FieldMap, window: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(window % 2 == 1, "window must be odd");
    let (w, h) = field.dims();
    let x: Vec<f64> = field.data().iter().map(|&v| v as f64).collect();
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let n = (window * window) as f64;
    let s1 = box_sum(&x, w, h, window / 2);
    let s2 = box_sum(&x2, w, h, window / 2);
    let mean: Vec<f64> = s1.iter().map(|s| s / n).collect();
    let std = s2
        .iter()
        .zip(&mean)
        .map(|(s, m)| libm::sqrt((s / n - m * m).max(0.0)))
        .collect();
    (mean, std)
}

pub fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let r = libm::ceilf(3.0 * sigma) as isize;
    let mut k: Vec<f32> = (-r..=r)
        .map(|i| libm::expf(-(i * i) as f32 / (2.0 * sigma * sigma)))
        .collect();
    let s: f32 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur, truncated at 3 sigma.
pub fn gaussian_blur(field: &FieldMap, sigma: f32) -> FieldMap {
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return field.clone();
    }
    let r = (k.len() / 2) as isize;
    let (w, h) = field.dims();
    let src = field.data();
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut s = 0.0;
            for (i, kv) in k.iter().enumerate() {
                s += kv * row[clamp_idx(x as isize + i as isize - r, w)];
            }
            tmp[y * w + x] = s;
        }
    }
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        for (i, kv) in k.iter().enumerate() {
            let yy = clamp_idx(y as isize + i as isize - r, h);
            let s = &tmp[yy * w..(yy + 1) * w];
            let d = &mut out[y * w..(y + 1) * w];
            for (d, s) in d.iter_mut().zip(s) {
                *d += kv * s;
            }
        }
    }
    FieldMap::from_vec(w, h, out, field.kind())
}

/// Grayscale erosion with a `k x k` square structuring element.
pub fn erode(field: &FieldMap, k: usize) -> FieldMap {
    let r = (k / 2) as isize;
    let (w, h) = field.dims();
    let src = field.data();
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = (x as isize - r).max(0) as usize;
            let hi = (x as isize + r).min(w as isize - 1) as usize;
            tmp[y * w + x] = row[lo..=hi].iter().copied().fold(f32::INFINITY, f32::min);
        }
    }
    let mut out = vec![f32::INFINITY; w * h];
    for y in 0..h {
        let lo = (y as isize - r).max(0) as usize;
        let hi = (y as isize + r).min(h as isize - 1) as usize;
        for yy in lo..=hi {
            let s = &tmp[yy * w..(yy + 1) * w];
            let d = &mut out[y * w..(y + 1) * w];
            for (d, s) in d.iter_mut().zip(s) {
                *d = d.min(*s);
            }
        }
    }
    FieldMap::from_vec(w, h, out, field.kind())
}
