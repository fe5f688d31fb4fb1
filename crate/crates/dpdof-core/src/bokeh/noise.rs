use alloc::vec;
use alloc::vec::Vec;

use crate::filter::gaussian_blur;
use crate::image::{FieldKind, FieldMap, Image};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBankParams {
    /// Side `L` of the patch cut from each flat field.
    pub patch_size: usize,
    /// Sigma of the Gaussian removed by the high-pass.
    pub highpass_sigma: f32,
    /// Width of the linear alpha ramp at the patch borders.
    pub feather: usize,
}

impl Default for NoiseBankParams {
    fn default() -> Self {
        Self {
            patch_size: 96,
            highpass_sigma: 2.0,
            feather: 8,
        }
    }
}

/// Zero-mean, unit-variance noise tiles with pairwise coprime periods.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBank {
    pub patches: Vec<FieldMap>,
    pub periods: Vec<usize>,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Border ramp `min(1, (distance to edge + 1/2) / feather)`.
fn feather_alpha(i: usize, n: usize, feather: usize) -> f64 {
    let d = i.min(n - 1 - i) as f64 + 0.5;
    (d / feather.max(1) as f64).min(1.0)
}

/// One periodic tile of period `period` from a flat-field image.
///
/// The central `L x L` crop is high-passed and given a feathered alpha.
/// Four copies are overlaid at offsets `{0, l} x {0, l}` on an
/// `(L + l)`-square canvas; the centre `l x l` window of the canvas,
/// divided by the accumulated alpha, is the tile. It is finally shifted to
/// zero mean and scaled to unit variance.
pub fn periodic_patch(flat: &FieldMap, period: usize, params: &NoiseBankParams) -> Result<FieldMap> {
    let big = params.patch_size;
    let l = period;
    if !(l + 2 * params.feather < big && big <= 2 * l) {
        return Err(Error::PatchSize {
            size: big,
            period: l,
            feather: params.feather,
        });
    }
    let (fw, fh) = flat.dims();
    if fw < big || fh < big {
        return Err(Error::InvalidParameter(alloc::format!(
            "flat field {fw}x{fh} is smaller than the {big}x{big} patch"
        )));
    }
    let (ox, oy) = ((fw - big) / 2, (fh - big) / 2);
    let patch = FieldMap::from_fn(big, big, FieldKind::Generic, |x, y| flat.get(ox + x, oy + y));
    let low = gaussian_blur(&patch, params.highpass_sigma);
    let n = big + l;
    let mut value = vec![0.0f64; n * n];
    let mut weight = vec![0.0f64; n * n];
    for (cx, cy) in [(0, 0), (l, 0), (0, l), (l, l)] {
        for y in 0..big {
            let ay = feather_alpha(y, big, params.feather);
            for x in 0..big {
                let a = ay * feather_alpha(x, big, params.feather);
                let v = (patch.get(x, y) - low.get(x, y)) as f64;
                let k = (cy + y) * n + cx + x;
                value[k] += a * v;
                weight[k] += a;
            }
        }
    }
    let start = big / 2;
    let mut tile: Vec<f64> = Vec::with_capacity(l * l);
    for y in start..start + l {
        for x in start..start + l {
            let k = y * n + x;
            tile.push(value[k] / weight[k]);
        }
    }
    let mean = tile.iter().sum::<f64>() / tile.len() as f64;
    let var = tile.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / tile.len() as f64;
    if !(var > 0.0) {
        return Err(Error::InvalidParameter("flat field has no high-frequency noise".into()));
    }
    let inv = 1.0 / libm::sqrt(var);
    let data = tile.iter().map(|v| ((v - mean) * inv) as f32).collect();
    Ok(FieldMap::from_vec(l, l, data, FieldKind::Generic))
}

/// Builds one tile per period; flat fields are used in turn.
pub fn build_noise_bank(flats: &[FieldMap], periods: &[usize], params: &NoiseBankParams) -> Result<NoiseBank> {
    if flats.is_empty() || periods.is_empty() {
        return Err(Error::InvalidParameter("need at least one flat field and one period".into()));
    }
    for (i, &a) in periods.iter().enumerate() {
        for &b in &periods[i + 1..] {
            if gcd(a, b) != 1 {
                return Err(Error::NonCoprimePeriods(a, b));
            }
        }
    }
    let patches = periods
        .iter()
        .enumerate()
        .map(|(i, &l)| periodic_patch(&flats[i % flats.len()], l, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseBank {
        patches,
        periods: periods.to_vec(),
    })
}

impl NoiseBank {
    pub fn validate(&self) -> Result<()> {
        if self.patches.len() != self.periods.len() {
            return Err(Error::InvalidParameter("one patch per period is required".into()));
        }
        for (p, &l) in self.patches.iter().zip(&self.periods) {
            if p.dims() != (l, l) {
                return Err(Error::DimensionMismatch {
                    expected: (l, l),
                    found: p.dims(),
                });
            }
        }
        Ok(())
    }

    /// `Σ_i N_i(x mod l_i, y mod l_i)`.
    #[inline]
    pub fn sample(&self, x: usize, y: usize) -> f32 {
        self.patches
            .iter()
            .zip(&self.periods)
            .map(|(p, &l)| p.get(x % l, y % l))
            .sum()
    }
}

/// Blurred-pixel weight: the radius ramped to 1 at one full-resolution pixel.
pub fn blur_weight_from_radius(radius: &FieldMap) -> FieldMap {
    radius.map(|r| r.clamp(0.0, 1.0)).with_kind(FieldKind::Mask)
}

/// Noise level from a shot/read model: `sqrt(a * luma + b)`.
pub fn noise_sigma_map(image: &Image, shot: f32, read: f32) -> FieldMap {
    image
        .luma()
        .map(|l| libm::sqrtf((shot * l.max(0.0) + read).max(0.0)))
        .with_kind(FieldKind::Sigma)
}

/// `B + sigma * M_blur * Σ_i N_i(x mod l_i)`, the same value on every channel.
pub fn inject_noise(image: &Image, sigma: &FieldMap, m_blur: &FieldMap, bank: &NoiseBank) -> Result<Image> {
    sigma.ensure_dims(image.dims())?;
    m_blur.ensure_dims(image.dims())?;
    bank.validate()?;
    let (w, h) = image.dims();
    let ch = image.channels();
    let mut out = image.clone();
    let d = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            let k = sigma.get(x, y) * m_blur.get(x, y);
            if k == 0.0 {
                continue;
            }
            let n = k * bank.sample(x, y);
            for c in 0..ch {
                d[(y * w + x) * ch + c] += n;
            }
        }
    }
    Ok(out)
}
