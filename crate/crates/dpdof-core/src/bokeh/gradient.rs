use alloc::vec;
use alloc::vec::Vec;

use crate::image::{FieldMap, RgbaImage};
use crate::Result;

/// Rasterized disk `{Δ : Δx² + Δy² <= (r + 1/2)²}` described by the half
/// height of each column offset `Δx = -n..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskProfile {
    pub half_heights: Vec<isize>,
    pub area: usize,
}

/// The rasterized disk only depends on `floor((r + 1/2)²)`.
fn disk_key(radius: f32) -> usize {
    let r = radius.max(0.0) as f64 + 0.5;
    // Truncation is the floor for the positive square.
    (r * r) as usize
}

impl DiskProfile {
    pub fn new(radius: f32) -> Self {
        Self::from_key(disk_key(radius))
    }

    fn from_key(key: usize) -> Self {
        let r2 = key as f64;
        let mut n = libm::floor(libm::sqrt(r2)) as isize;
        while ((n + 1) * (n + 1)) as f64 <= r2 {
            n += 1;
        }
        while (n * n) as f64 > r2 {
            n -= 1;
        }
        let mut half_heights = Vec::with_capacity((2 * n + 1) as usize);
        let mut area = 0usize;
        for dx in -n..=n {
            let rem = r2 - (dx * dx) as f64;
            let mut h = libm::floor(libm::sqrt(rem.max(0.0))) as isize;
            while ((h + 1) * (h + 1)) as f64 <= rem {
                h += 1;
            }
            while h > 0 && ((h * h) as f64) > rem {
                h -= 1;
            }
            half_heights.push(h);
            area += (2 * h + 1) as usize;
        }
        Self { half_heights, area }
    }

    pub fn reach(&self) -> isize {
        (self.half_heights.len() / 2) as isize
    }

    pub fn contains(&self, dx: isize, dy: isize) -> bool {
        let n = self.reach();
        dx.abs() <= n && dy.abs() <= self.half_heights[(dx + n) as usize]
    }
}

/// Disk of one squared-radius key with the ring rows its column ends hit
/// for the source row `row`.
struct RingDisk {
    profile: DiskProfile,
    inv_area: f64,
    row: usize,
    /// Offsets of the top and one-past-bottom difference rows per column.
    ends: Vec<(usize, usize)>,
}

/// Uniform rasterized-disk scatter in the gradient domain.
///
/// Every source pixel adds `v / |D|` at the top of each disk column and
/// subtracts it just below the bottom; a prefix sum down each column then
/// reconstructs the scattered solid disks. Cost per pixel is linear in the
/// radius. Difference rows live in a ring of `2 * reach + 2` rows and are
/// summed into the output as soon as no later source row can touch them.
pub fn scatter_blur_gradient(layer: &RgbaImage, radius: &FieldMap) -> Result<RgbaImage> {
    radius.ensure_dims(layer.dims())?;
    let (w, h) = layer.dims();
    let (_, rmax) = radius.min_max();
    if !(rmax >= 0.5) {
        return Ok(layer.clone());
    }
    let reach = DiskProfile::new(rmax).reach() as usize;
    let ring = 2 * reach + 2;
    // One spare row past the ring takes the ends that fall below the image.
    let spare = ring;
    let mut diff = vec![0.0f64; (ring + 1) * w * 4];
    let mut run = vec![0.0f64; w * 4];
    let mut out = vec![[0.0f32; 4]; w * h];
    let mut disks: Vec<Option<RingDisk>> = Vec::new();
    disks.resize_with(disk_key(rmax) + 1, || None);
    let wrap = |r: usize| if r >= ring { r - ring } else { r };
    for y in 0..h {
        let base = y % ring;
        for x in 0..w {
            let i = y * w + x;
            let v = layer.data[i];
            if v == [0.0; 4] {
                continue;
            }
            let r = radius.data()[i];
            let disk = disks[disk_key(r)].get_or_insert_with(|| {
                let profile = DiskProfile::new(r);
                RingDisk {
                    inv_area: 1.0 / profile.area as f64,
                    ends: vec![(0, 0); profile.half_heights.len()],
                    profile,
                    row: usize::MAX,
                }
            });
            if disk.row != y {
                for (e, &hh) in disk.ends.iter_mut().zip(&disk.profile.half_heights) {
                    let hh = hh as usize;
                    let top = if hh > y { 0 } else { wrap(base + ring - hh) };
                    let bottom = if y + hh + 1 < h { wrap(base + hh + 1) } else { spare };
                    *e = (top * w * 4, bottom * w * 4);
                }
                disk.row = y;
            }
            let inv = disk.inv_area;
            let s = [v[0] as f64 * inv, v[1] as f64 * inv, v[2] as f64 * inv, v[3] as f64 * inv];
            let n = disk.profile.reach() as usize;
            // Columns x - n + k inside the image.
            let k0 = n.saturating_sub(x);
            let k1 = (w + n - x).min(2 * n + 1);
            let cx0 = 4 * (x + k0 - n);
            for (k, &(top, bottom)) in disk.ends[k0..k1].iter().enumerate() {
                let cx = cx0 + 4 * k;
                let a = &mut diff[top + cx..top + cx + 4];
                for c in 0..4 {
                    a[c] += s[c];
                }
                let b = &mut diff[bottom + cx..bottom + cx + 4];
                for c in 0..4 {
                    b[c] -= s[c];
                }
            }
        }
        let mut finish = |t: usize| {
            let row = &mut diff[(t % ring) * w * 4..(t % ring + 1) * w * 4];
            for (r, d) in run.iter_mut().zip(row.iter_mut()) {
                *r += *d;
                *d = 0.0;
            }
            for (o, r) in out[t * w..(t + 1) * w].iter_mut().zip(run.chunks_exact(4)) {
                *o = [r[0] as f32, r[1] as f32, r[2] as f32, r[3] as f32];
            }
        };
        if y >= reach {
            finish(y - reach);
        }
        if y + 1 == h {
            for t in h.saturating_sub(reach)..h {
                finish(t);
            }
        }
    }
    Ok(RgbaImage {
        width: w,
        height: h,
        data: out,
    })
}
