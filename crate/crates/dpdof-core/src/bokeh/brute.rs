use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::image::{FieldMap, RgbaImage};
use crate::Result;

/// Anti-aliased disk profile: `clamp(r + 1/2 - |offset|, 0, 1)`.
#[inline]
pub fn disk_weight(radius: f32, distance: f32) -> f32 {
    (radius + 0.5 - distance).clamp(0.0, 1.0)
}

/// Total weight of the anti-aliased disk of `radius`.
pub fn disk_norm(radius: f32) -> f32 {
    let n = libm::ceilf(radius + 0.5) as isize;
    let mut s = 0.0f64;
    for dy in -n..=n {
        for dx in -n..=n {
            s += disk_weight(radius, libm::sqrtf((dx * dx + dy * dy) as f32)) as f64;
        }
    }
    s as f32
}

/// Spatially varying disk blur written as a gather (scatter-as-gather):
/// `B(x) = Σ_Δ I(x + Δ) K_{x+Δ}(−Δ)`, where `K_p` is the normalized
/// anti-aliased disk of radius `r(p)`. All four channels move together.
pub fn scatter_blur_brute(layer: &RgbaImage, radius: &FieldMap) -> Result<RgbaImage> {
    radius.ensure_dims(layer.dims())?;
    let (w, h) = layer.dims();
    let (_, rmax) = radius.min_max();
    if !(rmax >= 0.5) {
        return Ok(layer.clone());
    }
    let mut norms: BTreeMap<u32, f32> = BTreeMap::new();
    let mut pre = Vec::with_capacity(w * h);
    let mut reach = Vec::with_capacity(w * h);
    for (px, &r) in layer.data.iter().zip(radius.data()) {
        let r = r.max(0.0);
        let n = *norms.entry(r.to_bits()).or_insert_with(|| disk_norm(r));
        pre.push(px.map(|v| v / n));
        reach.push(r + 0.5);
    }
    let span = libm::ceilf(rmax + 0.5) as isize;
    let mut offsets = Vec::new();
    for dy in -span..=span {
        for dx in -span..=span {
            let dist = libm::sqrtf((dx * dx + dy * dy) as f32);
            if dist < rmax + 0.5 {
                offsets.push((dx, dy, dist));
            }
        }
    }
    let mut out = vec![[0.0f32; 4]; w * h];
    let (wi, hi) = (w as isize, h as isize);
    for &(dx, dy, dist) in &offsets {
        let y0 = (-dy).max(0);
        let y1 = (hi - dy).min(hi);
        let x0 = (-dx).max(0);
        let x1 = (wi - dx).min(wi);
        for y in y0..y1 {
            let orow = (y * wi) as usize;
            let srow = (y + dy) * wi + dx;
            for x in x0..x1 {
                let s = (srow + x) as usize;
                let wgt = (reach[s] - dist).clamp(0.0, 1.0);
                if wgt > 0.0 {
                    let o = &mut out[orow + x as usize];
                    let p = &pre[s];
                    o[0] += p[0] * wgt;
                    o[1] += p[1] * wgt;
                    o[2] += p[2] * wgt;
                    o[3] += p[3] * wgt;
                }
            }
        }
    }
    Ok(RgbaImage {
        width: w,
        height: h,
        data: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::FieldKind;

    #[test]
    fn zero_radius_is_identity() {
        let l = RgbaImage::from_fn(9, 7, |x, y| [x as f32, y as f32, 0.5, 1.0]);
        let r = FieldMap::filled(9, 7, 0.0, FieldKind::Radius);
        assert_eq!(scatter_blur_brute(&l, &r).unwrap(), l);
        let r = FieldMap::from_fn(9, 7, FieldKind::Radius, |x, _| if x == 3 { 0.4 } else { 0.0 });
        let b = scatter_blur_brute(&l, &r).unwrap();
        for (a, b) in b.data.iter().zip(&l.data) {
            for c in 0..4 {
                assert!((a[c] - b[c]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn single_pixel_makes_antialiased_disk() {
        let (w, h) = (15, 15);
        let mut l = RgbaImage::zeros(w, h);
        l.data[7 * w + 7] = [1.0; 4];
        let r = FieldMap::filled(w, h, 2.0, FieldKind::Radius);
        let b = scatter_blur_brute(&l, &r).unwrap();
        let mut norm = 0.0f64;
        for dy in -3i32..=3 {
            for dx in -3i32..=3 {
                norm += ((2.5 - ((dx * dx + dy * dy) as f64).sqrt()).clamp(0.0, 1.0)) as f64;
            }
        }
        for y in 0..h {
            for x in 0..w {
                let d = (((x as f64 - 7.0).powi(2) + (y as f64 - 7.0).powi(2)) as f64).sqrt();
                let expect = (2.5 - d).clamp(0.0, 1.0) / norm;
                assert!((b.data[y * w + x][0] as f64 - expect).abs() < 1e-6);
            }
        }
        let s = b.channel_sums();
        assert!((s[0] - 1.0).abs() < 1e-5 && (s[3] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn constant_image_constant_radius() {
        let l = RgbaImage::from_fn(20, 20, |_, _| [0.25, 0.5, 0.75, 1.0]);
        let r = FieldMap::filled(20, 20, 1.7, FieldKind::Radius);
        let b = scatter_blur_brute(&l, &r).unwrap();
        // Away from the border every output sees full kernels.
        for y in 3..17 {
            for x in 3..17 {
                let p = b.data[y * 20 + x];
                assert!((p[1] - 0.5).abs() < 1e-5 && (p[3] - 1.0).abs() < 1e-5);
            }
        }
    }
}
