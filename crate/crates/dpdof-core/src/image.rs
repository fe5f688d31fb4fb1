//! Image and single-channel map containers.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Transfer curve the samples of an [`Image`] are encoded with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    Linear,
    Srgb,
}

/// Row-major interleaved floating point image with 1 to 4 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
    colorspace: ColorSpace,
}

impl Image {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f32>,
        colorspace: ColorSpace,
    ) -> Result<Self> {
        if width == 0 || height == 0 || !(1..=4).contains(&channels) {
            return Err(Error::InvalidDimensions {
                width,
                height,
                channels,
            });
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidDimensions {
                width,
                height,
                channels,
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            colorspace,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        assert!(width > 0 && height > 0 && (1..=4).contains(&channels));
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
            colorspace: ColorSpace::Linear,
        }
    }

    /// Builds a single-channel linear image from a closure over pixel coordinates.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
            colorspace: ColorSpace::Linear,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn with_colorspace(mut self, colorspace: ColorSpace) -> Self {
        self.colorspace = colorspace;
        self
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Copies one channel out as a map.
    pub fn channel(&self, c: usize, kind: FieldKind) -> FieldMap {
        assert!(c < self.channels);
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px[c])
            .collect();
        FieldMap::from_vec(self.width, self.height, data, kind)
    }

    /// Mean of the first three channels (or the single channel of a gray image).
    pub fn luma(&self) -> FieldMap {
        let n = self.channels.min(3);
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px[..n].iter().sum::<f32>() / n as f32)
            .collect();
        FieldMap::from_vec(self.width, self.height, data, FieldKind::Generic)
    }

    /// Wraps a single-channel image as a map without copying.
    pub fn into_field(self, kind: FieldKind) -> Result<FieldMap> {
        if self.channels != 1 {
            return Err(Error::ChannelMismatch {
                expected: 1,
                found: self.channels,
            });
        }
        Ok(FieldMap::from_vec(self.width, self.height, self.data, kind))
    }

    /// Expands to three channels (gray is replicated, alpha dropped).
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.width * self.height * 3);
        for px in self.data.chunks_exact(self.channels) {
            match self.channels {
                1 | 2 => data.extend_from_slice(&[px[0], px[0], px[0]]),
                _ => data.extend_from_slice(&px[..3]),
            }
        }
        Image {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
            colorspace: self.colorspace,
        }
    }
}

/// What a [`FieldMap`] holds. Confidence and mask maps live in `[0, 1]`,
/// radius maps are non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Disparity,
    Confidence,
    Mask,
    Radius,
    Sigma,
    Generic,
}

/// Single-channel floating point map.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
    kind: FieldKind,
}

impl FieldMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>, kind: FieldKind) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                channels: 1,
            });
        }
        Ok(Self::from_vec(width, height, data, kind))
    }

    pub(crate) fn from_vec(width: usize, height: usize, data: Vec<f32>, kind: FieldKind) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
            kind,
        }
    }

    pub fn filled(width: usize, height: usize, value: f32, kind: FieldKind) -> Self {
        assert!(width > 0 && height > 0);
        Self::from_vec(width, height, vec![value; width * height], kind)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        kind: FieldKind,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data, kind)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Edge-clamped access with signed coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> FieldMap {
        Self::from_vec(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
            self.kind,
        )
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    /// Converts into a single-channel linear image.
    pub fn into_image(self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.data,
            colorspace: ColorSpace::Linear,
        }
    }

    pub fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.dims(),
            });
        }
        Ok(())
    }
}

/// Premultiplied RGBA image used for the blur layers.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbaImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f32; 4]>,
}

impl RgbaImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![[0.0; 4]; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 4]) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Premultiplies an RGB image by an alpha map.
    pub fn premultiplied(rgb: &Image, alpha: &FieldMap) -> Self {
        assert_eq!(rgb.dims(), alpha.dims());
        let rgb = rgb.to_rgb();
        let data = rgb
            .data()
            .chunks_exact(3)
            .zip(alpha.data())
            .map(|(px, &a)| [px[0] * a, px[1] * a, px[2] * a, a])
            .collect();
        Self {
            width: rgb.width(),
            height: rgb.height(),
            data,
        }
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f32; 4] {
        self.data[y * self.width + x]
    }

    pub fn channel_sums(&self) -> [f64; 4] {
        let mut s = [0.0f64; 4];
        for px in &self.data {
            for c in 0..4 {
                s[c] += px[c] as f64;
            }
        }
        s
    }

    /// Divides colour by alpha where alpha exceeds `eps`; elsewhere black.
    pub fn unpremultiply(&self, eps: f32) -> Image {
        let mut data = Vec::with_capacity(self.width * self.height * 3);
        for px in &self.data {
            if px[3] > eps {
                let inv = 1.0 / px[3];
                data.extend_from_slice(&[px[0] * inv, px[1] * inv, px[2] * inv]);
            } else {
                data.extend_from_slice(&[0.0, 0.0, 0.0]);
            }
        }
        Image::new(self.width, self.height, 3, data, ColorSpace::Linear)
            .expect("dimensions are consistent")
    }

    pub fn alpha(&self) -> FieldMap {
        FieldMap::from_vec(
            self.width,
            self.height,
            self.data.iter().map(|px| px[3]).collect(),
            FieldKind::Mask,
        )
    }
}
