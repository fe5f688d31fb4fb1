use alloc::vec::Vec;

use super::radius::{d_null, BlurParams};
use crate::image::{FieldMap, Image, RgbaImage};
use crate::{Error, Result};

pub const BAND_COUNT: usize = 5;

/// Six ascending disparities bounding five bands, ordered far to near.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCutoffs {
    pub values: [f32; BAND_COUNT + 1],
    /// Band that contains the focus disparity.
    pub in_focus_index: usize,
}

impl BandCutoffs {
    /// Overlap width of band `j`.
    pub fn eta(&self, j: usize, eta_fraction: f32) -> f32 {
        eta_fraction * (self.values[j + 1] - self.values[j])
    }

    /// Tent weight of band `j` at disparity `d`: 1 inside the band, falling
    /// linearly to 0 at `eta` beyond either bound. The outermost bands extend
    /// without limit.
    pub fn alpha(&self, j: usize, d: f32, eta_fraction: f32) -> f32 {
        let lo = self.values[j];
        let hi = self.values[j + 1];
        let below = if j == 0 { f32::INFINITY } else { d - lo };
        let above = if j == BAND_COUNT - 1 { f32::INFINITY } else { hi - d };
        let m = below.min(above);
        if m >= 0.0 {
            return 1.0;
        }
        (1.0 + m / self.eta(j, eta_fraction)).clamp(0.0, 1.0)
    }
}

fn split(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
}

/// Band boundaries for disparities in `[d_min, d_max]`.
///
/// The in-focus band is `d_focus ± (d_null + 2 r_brute / kappa)`, the
/// offset at which the full-resolution radius reaches the brute-force
/// limit. Two equal bands cover each side. When one side holds no
/// disparities its bands move to the other side; when both are empty the
/// side bands get nominal widths equal to the in-focus width.
pub fn band_cutoffs(d_min: f32, d_max: f32, d_focus: f32, kappa: f64, params: &BlurParams) -> BandCutoffs {
    let half = d_null(kappa, params) + 2.0 * params.r_brute as f64 / kappa;
    let f = d_focus as f64;
    let lo = f - half;
    let hi = f + half;
    let (dmin, dmax) = (d_min as f64, d_max as f64);
    // A side thinner than a thousandth of the in-focus band counts as empty
    // so that cutoffs stay strictly ascending in f32.
    let min_extent = 1e-3 * (hi - lo);
    let far = lo - dmin > min_extent;
    let near = dmax - hi > min_extent;
    let mut v: Vec<f64> = Vec::with_capacity(BAND_COUNT + 1);
    let in_focus_index = match (far, near) {
        (true, true) => {
            v.extend(split(dmin, lo, 2));
            v.extend(split(hi, dmax, 2));
            2
        }
        (true, false) => {
            v.extend(split(dmin, lo, 4));
            v.push(hi);
            4
        }
        (false, true) => {
            v.push(lo);
            v.extend(split(hi, dmax, 4));
            0
        }
        (false, false) => {
            let wdt = hi - lo;
            v.extend([lo - wdt, lo - 0.5 * wdt, lo, hi, hi + 0.5 * wdt, hi + wdt]);
            2
        }
    };
    let mut values = [0.0f32; BAND_COUNT + 1];
    for (o, x) in values.iter_mut().zip(&v) {
        *o = *x as f32;
    }
    BandCutoffs {
        values,
        in_focus_index,
    }
}

/// Premultiplied RGBA bands at working resolution with their blur radii.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub cutoffs: BandCutoffs,
    pub layers: Vec<RgbaImage>,
    /// Blur radius per working-resolution pixel.
    pub radii: FieldMap,
    pub eta_fraction: f32,
}

impl LayerStack {
    pub fn in_focus_index(&self) -> usize {
        self.cutoffs.in_focus_index
    }
}

/// Splits a linear RGB image into premultiplied band layers
/// `alpha_j * [R, G, B, 1]` using the tent weights of `cutoffs`.
pub fn decompose_layers(
    color: &Image,
    disparity: &FieldMap,
    radii: &FieldMap,
    cutoffs: &BandCutoffs,
    eta_fraction: f32,
) -> Result<LayerStack> {
    if color.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            found: color.channels(),
        });
    }
    disparity.ensure_dims(color.dims())?;
    radii.ensure_dims(color.dims())?;
    let layers = (0..BAND_COUNT)
        .map(|j| {
            let alpha = disparity.map(|d| cutoffs.alpha(j, d, eta_fraction));
            RgbaImage::premultiplied(color, &alpha)
        })
        .collect();
    Ok(LayerStack {
        cutoffs: *cutoffs,
        layers,
        radii: radii.clone(),
        eta_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ascending(c: &BandCutoffs) -> bool {
        c.values.windows(2).all(|p| p[0] < p[1])
    }

    #[test]
    fn symmetric_example() {
        let p = BlurParams::default();
        let c = band_cutoffs(-20.0, 20.0, 0.0, 1.0, &p);
        assert!((c.values[2] + 6.06).abs() < 1e-5);
        assert!((c.values[3] - 6.06).abs() < 1e-5);
        assert_eq!(c.values[0], -20.0);
        assert_eq!(c.values[5], 20.0);
        assert!((c.values[1] + 13.03).abs() < 1e-4);
        assert_eq!(c.in_focus_index, 2);
        assert!(ascending(&c));
    }

    #[test]
    fn empty_near_side_moves_bands_far() {
        let p = BlurParams::default();
        let c = band_cutoffs(-30.0, 0.0, 0.0, 1.0, &p);
        assert_eq!(c.in_focus_index, 4);
        assert_eq!(c.values[0], -30.0);
        assert!((c.values[4] + 6.06).abs() < 1e-5);
        assert!(ascending(&c));
        let n = band_cutoffs(0.0, 30.0, 0.0, 1.0, &p);
        assert_eq!(n.in_focus_index, 0);
        assert_eq!(n.values[5], 30.0);
        assert!(ascending(&n));
    }

    #[test]
    fn both_sides_empty() {
        let p = BlurParams::default();
        let c = band_cutoffs(-0.1, 0.1, 0.0, 4.0, &p);
        assert_eq!(c.in_focus_index, 2);
        assert!(ascending(&c));
    }

    #[test]
    fn tent_weights() {
        let c = BandCutoffs {
            values: [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0],
            in_focus_index: 2,
        };
        assert_eq!(c.alpha(2, 0.0, 0.25), 1.0);
        assert_eq!(c.alpha(0, 0.0, 0.25), 0.0);
        assert_eq!(c.alpha(4, 0.0, 0.25), 0.0);
        // At a cutoff both neighbours are fully on.
        assert_eq!(c.alpha(2, 1.0, 0.25), 1.0);
        assert_eq!(c.alpha(3, 1.0, 0.25), 1.0);
        // eta of band 2 is 0.5.
        assert_eq!(c.alpha(2, 1.5, 0.25), 0.0);
        assert!((c.alpha(2, 1.25, 0.25) - 0.5).abs() < 1e-6);
        assert_eq!(c.alpha(0, -100.0, 0.25), 1.0);
        assert_eq!(c.alpha(4, 100.0, 0.25), 1.0);
    }
}
