use alloc::vec;
use alloc::vec::Vec;

use super::gradient::DiskProfile;
use crate::image::{FieldMap, Image};
use crate::{Error, Result};

/// Blend weight of the blurred background at row `y`: 0 in the bottom tenth
/// of the frame, 1 in the top tenth, linear in between.
pub fn vertical_ramp(y: usize, height: usize) -> f32 {
    if height <= 1 {
        return 0.0;
    }
    let t = (height - 1 - y) as f32 / (height - 1) as f32;
    (t * 1.25 - 0.125).clamp(0.0, 1.0)
}

/// Uniform rasterized-disk gather of `(1 - M) [R, G, B, 1]`, normalized by
/// the gathered alpha. Pixels whose disk holds no background keep their
/// input colour.
pub fn blur_background(image: &Image, mask: &FieldMap, radius: f32) -> Result<Image> {
    if image.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            found: image.channels(),
        });
    }
    mask.ensure_dims(image.dims())?;
    let (w, h) = image.dims();
    // Row prefix sums of the premultiplied background, one extra leading zero.
    let mut prefix = vec![[0.0f64; 4]; (w + 1) * h];
    for y in 0..h {
        let base = y * (w + 1);
        for x in 0..w {
            let a = (1.0 - mask.get(x, y)) as f64;
            let mut p = prefix[base + x];
            p[0] += a * image.get(x, y, 0) as f64;
            p[1] += a * image.get(x, y, 1) as f64;
            p[2] += a * image.get(x, y, 2) as f64;
            p[3] += a;
            prefix[base + x + 1] = p;
        }
    }
    let disk = DiskProfile::new(radius);
    // Half width of the disk in each row offset dy = -n..=n.
    let n = disk.reach();
    let mut row_half: Vec<isize> = vec![-1; (2 * n + 1) as usize];
    for (k, &hh) in disk.half_heights.iter().enumerate() {
        let dx = (k as isize - n).abs();
        for dy in -hh..=hh {
            let e = &mut row_half[(dy + n) as usize];
            *e = (*e).max(dx);
        }
    }
    let mut out = Vec::with_capacity(w * h * 3);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut s = [0.0f64; 4];
            for (k, &hw) in row_half.iter().enumerate() {
                let yy = y + k as isize - n;
                if hw < 0 || yy < 0 || yy >= h as isize {
                    continue;
                }
                let x0 = (x - hw).max(0) as usize;
                let x1 = ((x + hw + 1).min(w as isize)) as usize;
                let base = yy as usize * (w + 1);
                let (a, b) = (prefix[base + x0], prefix[base + x1]);
                for c in 0..4 {
                    s[c] += b[c] - a[c];
                }
            }
            if s[3] > 1e-9 {
                out.extend((0..3).map(|c| (s[c] / s[3]) as f32));
            } else {
                out.extend((0..3).map(|c| image.get(x as usize, y as usize, c)));
            }
        }
    }
    Image::new(w, h, 3, out, image.colorspace())
}

/// Segmentation-only rendering: blur the background with a uniform disk and
/// blend `(1 - w(y)(1 - M)) I + w(y)(1 - M) blurred`, with `w` from
/// [`vertical_ramp`] unless `uniform_weight` overrides it.
pub fn mask_blur_render(image: &Image, mask: &FieldMap, radius: f32, uniform_weight: Option<f32>) -> Result<Image> {
    let blurred = blur_background(image, mask, radius)?;
    let (w, h) = image.dims();
    let mut out = image.clone();
    {
        let d = out.data_mut();
        for y in 0..h {
            let wy = uniform_weight.unwrap_or_else(|| vertical_ramp(y, h));
            for x in 0..w {
                let k = wy * (1.0 - mask.get(x, y));
                if k == 0.0 {
                    continue;
                }
                let i = (y * w + x) * 3;
                for c in 0..3 {
                    d[i + c] = (1.0 - k) * d[i + c] + k * blurred.data()[i + c];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::FieldKind;

    fn img() -> Image {
        Image::from_fn(30, 20, |x, y| ((x * 3 + y * 7) % 11) as f32 / 11.0).to_rgb()
    }

    #[test]
    fn full_mask_passes_through() {
        let m = FieldMap::filled(30, 20, 1.0, FieldKind::Mask);
        assert_eq!(mask_blur_render(&img(), &m, 5.0, None).unwrap(), img());
    }

    #[test]
    fn bottom_row_is_sharp() {
        let m = FieldMap::filled(30, 20, 0.0, FieldKind::Mask);
        let out = mask_blur_render(&img(), &m, 5.0, None).unwrap();
        for x in 0..30 {
            for c in 0..3 {
                assert_eq!(out.get(x, 19, c), img().get(x, 19, c));
            }
        }
        assert_eq!(vertical_ramp(0, 20), 1.0);
        assert_eq!(vertical_ramp(19, 20), 0.0);
    }

    #[test]
    fn forced_weight_is_uniform_disk_blur() {
        let src = img();
        let m = FieldMap::filled(30, 20, 0.0, FieldKind::Mask);
        let out = mask_blur_render(&src, &m, 3.0, Some(1.0)).unwrap();
        let disk = DiskProfile::new(3.0);
        for &(x, y) in &[(10isize, 10isize), (0, 0), (29, 5)] {
            let (mut s, mut n) = (0.0f64, 0.0f64);
            for dy in -3..=3 {
                for dx in -3..=3 {
                    let (xx, yy) = (x + dx, y + dy);
                    if disk.contains(dx, dy) && xx >= 0 && yy >= 0 && xx < 30 && yy < 20 {
                        s += src.get(xx as usize, yy as usize, 0) as f64;
                        n += 1.0;
                    }
                }
            }
            assert!((out.get(x as usize, y as usize, 0) as f64 - s / n).abs() < 1e-5);
        }
    }
}
