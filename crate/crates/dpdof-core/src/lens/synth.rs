use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{disparity_from_depth, LensParams};
use crate::image::{FieldKind, FieldMap, Image};
use crate::resample::sample_row_linear;
use crate::stereo::{DisparityField, DpPair};
use crate::{Error, Result};

/// Largest disparity magnitude the synthetic generator will produce; the
/// matcher cannot see beyond it.
pub const SYNTH_MAX_DISPARITY: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum DepthSpec {
    Constant(f64),
    /// Per-pixel depth in meters at texture resolution.
    Map(FieldMap),
}

/// Per-pixel affine corruption `d' = gain * d + offset` emulating aberrations.
#[derive(Debug, Clone, PartialEq)]
pub struct Distortion {
    pub gain: FieldMap,
    pub offset: FieldMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub texture: Image,
    pub depth: DepthSpec,
    pub lens: LensParams,
    pub noise_sigma: f32,
    pub distortion: Option<Distortion>,
    pub seed: u64,
}

/// Renders a DP pair from a per-pixel disparity map:
/// `left(x) = texture(x + d/2)`, `right(x) = texture(x - d/2)` with linear
/// interpolation along rows, plus i.i.d. Gaussian noise.
pub fn synth_from_disparity(
    texture: &Image,
    disparity: &FieldMap,
    noise_sigma: f32,
    seed: u64,
) -> Result<DpPair> {
    if texture.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            found: texture.channels(),
        });
    }
    disparity.ensure_dims(texture.dims())?;
    if let Some(&d) = disparity
        .data()
        .iter()
        .find(|d| !(d.abs() as f64 <= SYNTH_MAX_DISPARITY))
    {
        return Err(Error::DisparityOutOfRange {
            value: d as f64,
            limit: SYNTH_MAX_DISPARITY,
        });
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter("noise sigma must be non-negative".into()));
    }
    let (w, h) = texture.dims();
    let mut left = Vec::with_capacity(w * h);
    let mut right = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = &texture.data()[y * w..(y + 1) * w];
        for x in 0..w {
            let half = 0.5 * disparity.get(x, y);
            left.push(sample_row_linear(row, x as f32 + half));
            right.push(sample_row_linear(row, x as f32 - half));
        }
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0f32, noise_sigma)
            .map_err(|e| Error::InvalidParameter(alloc::format!("{e}")))?;
        left.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
        right.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    }
    let cs = texture.colorspace();
    DpPair::new(Image::new(w, h, 1, left, cs)?, Image::new(w, h, 1, right, cs)?, 1, 1)
}

/// Synthesizes a DP capture of `scene` and returns it with the disparity
/// actually applied (after distortion) as ground truth at confidence 1.
pub fn synth_dp_pair(scene: &SceneSpec) -> Result<(DpPair, DisparityField)> {
    scene.lens.validate()?;
    let (w, h) = scene.texture.dims();
    let mut d = match &scene.depth {
        DepthSpec::Constant(z) => {
            if !(*z > 0.0) {
                return Err(Error::InvalidParameter("depth must be positive".into()));
            }
            FieldMap::filled(w, h, disparity_from_depth(&scene.lens, *z) as f32, FieldKind::Disparity)
        }
        DepthSpec::Map(m) => {
            m.ensure_dims((w, h))?;
            if m.data().iter().any(|&z| !(z > 0.0)) {
                return Err(Error::InvalidParameter("depth must be positive".into()));
            }
            m.map(|z| disparity_from_depth(&scene.lens, z as f64) as f32)
                .with_kind(FieldKind::Disparity)
        }
    };
    if let Some(dist) = &scene.distortion {
        dist.gain.ensure_dims((w, h))?;
        dist.offset.ensure_dims((w, h))?;
        for ((v, g), o) in d
            .data_mut()
            .iter_mut()
            .zip(dist.gain.data())
            .zip(dist.offset.data())
        {
            *v = g * *v + o;
        }
    }
    let pair = synth_from_disparity(&scene.texture, &d, scene.noise_sigma, scene.seed)?;
    let conf = FieldMap::filled(w, h, 1.0, FieldKind::Confidence);
    Ok((pair, DisparityField::new(d, conf)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texture(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| (((x * 37 + y * 11) % 17) as f32) / 17.0)
    }

    #[test]
    fn focus_plane_gives_identical_views() {
        let lens = LensParams::with_gain(-1.5, 1.2);
        let scene = SceneSpec {
            texture: texture(32, 16),
            depth: DepthSpec::Constant(1.2),
            lens,
            noise_sigma: 0.0,
            distortion: None,
            seed: 0,
        };
        let (pair, truth) = synth_dp_pair(&scene).unwrap();
        assert_eq!(pair.left, pair.right);
        assert_eq!(pair.left.data(), scene.texture.data());
        assert!(truth.disparity.data().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn distortion_is_affine() {
        let lens = LensParams::with_gain(1.0, 1.0);
        let (w, h) = (16, 8);
        let scene = SceneSpec {
            texture: texture(w, h),
            // 1/z - 1/D = 1 - 0 at infinity.
            depth: DepthSpec::Constant(f64::INFINITY),
            lens,
            noise_sigma: 0.0,
            distortion: Some(Distortion {
                gain: FieldMap::filled(w, h, 1.1, FieldKind::Generic),
                offset: FieldMap::filled(w, h, 0.3, FieldKind::Generic),
            }),
            seed: 0,
        };
        let (_, truth) = synth_dp_pair(&scene).unwrap();
        assert!(truth.disparity.data().iter().all(|&d| (d - 1.4).abs() < 1e-6));
    }

    #[test]
    fn out_of_range_disparity_rejected() {
        let t = texture(8, 8);
        let d = FieldMap::filled(8, 8, 3.5, FieldKind::Disparity);
        assert!(matches!(
            synth_from_disparity(&t, &d, 0.0, 0),
            Err(Error::DisparityOutOfRange { .. })
        ));
    }

    #[test]
    fn noise_is_seeded() {
        let t = texture(16, 16);
        let d = FieldMap::filled(16, 16, 0.0, FieldKind::Disparity);
        let a = synth_from_disparity(&t, &d, 0.01, 7).unwrap();
        let b = synth_from_disparity(&t, &d, 0.01, 7).unwrap();
        let c = synth_from_disparity(&t, &d, 0.01, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.left, c.left);
    }
}
