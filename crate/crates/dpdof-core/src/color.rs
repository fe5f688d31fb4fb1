//! sRGB transfer curve.
//!
//! Pipeline math runs on linear samples; these conversions are only applied
//! at load/save time. Values above 1 (highlights) pass through the curve
//! unclamped.


use crate::image::{ColorSpace, Image};

/// sRGB-encoded value to linear light.
#[inline]
pub fn srgb_to_linear(v: f32) -> f32 {
    let v = v as f64;
    let out = if v <= 0.04045 {
        v / 12.92
    } else {
        libm::pow((v + 0.055) / 1.055, 2.4)
    };
    out as f32
}

/// Linear light to sRGB-encoded value.
#[inline]
pub fn linear_to_srgb(v: f32) -> f32 {
    let v = v as f64;
    let out = if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * libm::pow(v, 1.0 / 2.4) - 0.055
    };
    out as f32
}

/// Encodes a linear image with the sRGB curve. Already-encoded input is
/// returned unchanged.
pub fn srgb_encode(image: &Image) -> Image {
    if image.colorspace() == ColorSpace::Srgb {
        return image.clone();
    }
    let mut out = image.clone().with_colorspace(ColorSpace::Srgb);
    out.data_mut()
        .iter_mut()
        .for_each(|v| *v = linear_to_srgb(*v));
    out
}

/// Decodes an sRGB image to linear light. Linear input is returned unchanged.
pub fn srgb_decode(image: &Image) -> Image {
    if image.colorspace() == ColorSpace::Linear {
        return image.clone();
    }
    let mut out = image.clone().with_colorspace(ColorSpace::Linear);
    out.data_mut()
        .iter_mut()
        .for_each(|v| *v = srgb_to_linear(*v));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference EOTF written out independently of the implementation above.
    fn eotf_reference(v: f64) -> f64 {
        if v <= 0.04045 {
            v / 12.92
        } else {
            libm::pow((v + 0.055) / 1.055, 2.4)
        }
    }

    #[test]
    fn fixed_points() {
        assert_eq!(srgb_to_linear(0.0), 0.0);
        assert_eq!(linear_to_srgb(0.0), 0.0);
        assert!((srgb_to_linear(1.0) - 1.0).abs() < 1e-7);
        assert!((linear_to_srgb(1.0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn half_encoded_is_about_0_214() {
        let reference = eotf_reference(0.5);
        assert!((reference - 0.214_041).abs() < 1e-5);
        assert!((srgb_to_linear(0.5) as f64 - reference).abs() < 1e-6);
        assert!((linear_to_srgb(0.214_041) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn inverse_pair_on_grid() {
        for i in 0..=1000 {
            let x = i as f32 / 1000.0;
            assert!((linear_to_srgb(srgb_to_linear(x)) - x).abs() <= 1e-6);
            assert!((srgb_to_linear(linear_to_srgb(x)) - x).abs() <= 1e-6);
        }
    }

    #[test]
    fn monotone() {
        let mut prev_e = -1.0;
        let mut prev_d = -1.0;
        for i in 0..=2000 {
            let x = i as f32 / 2000.0;
            let e = linear_to_srgb(x);
            let d = srgb_to_linear(x);
            assert!(e > prev_e && d > prev_d);
            prev_e = e;
            prev_d = d;
        }
    }

    #[test]
    fn highlights_not_clamped() {
        assert!(linear_to_srgb(2.0) > 1.0);
        assert!((srgb_to_linear(linear_to_srgb(2.0)) - 2.0).abs() < 1e-5);
    }
}
