use crate::image::{FieldKind, FieldMap};

/// `d_null * kappa` without a person in the scene.
pub const D_NULL_DEFAULT: f64 = 0.56;
/// `d_null * kappa` when a person segmentation is available.
pub const D_NULL_PERSON: f64 = 0.19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurParams {
    /// Global radius scale `s` in full-resolution pixels per disparity unit.
    pub scale: f64,
    /// Radius cap in full-resolution pixels.
    pub r_max: f32,
    /// Largest radius (working resolution) blurred by the brute-force path.
    pub r_brute: f32,
    /// Band overlap as a fraction of the band width.
    pub eta_fraction: f32,
    /// Multiplier of kappa for pixels in front of the focus plane.
    pub frontal_factor: f64,
    /// `d_null * kappa`.
    pub d_null_const: f64,
    /// Focus distance `z` in meters.
    pub focus_distance: f64,
}

impl Default for BlurParams {
    fn default() -> Self {
        Self {
            scale: 4.0,
            r_max: 30.0,
            r_brute: 2.75,
            eta_fraction: 0.25,
            frontal_factor: 0.6,
            d_null_const: D_NULL_DEFAULT,
            focus_distance: 1.0,
        }
    }
}

/// Focus-distance factor `clamp(0.33 z + 0.17, 1, 3.5)`.
pub fn kappa1(z: f64) -> f64 {
    ((33.0 * z + 17.0) / 100.0).clamp(1.0, 3.5)
}

/// Focus-disparity factor `clamp(1 / (1 + d_focus / 2), 0.5, 2)`. For
/// `d_focus <= -2` the unclamped value diverges, so the upper clamp applies.
pub fn kappa2(d_focus: f64) -> f64 {
    let den = 1.0 + d_focus / 2.0;
    if den <= 0.0 {
        return 2.0;
    }
    (1.0 / den).clamp(0.5, 2.0)
}

/// Blur strength `s * kappa1(z) * kappa2(d_focus)`.
pub fn kappa(z: f64, d_focus: f64, s: f64) -> f64 {
    s * kappa1(z) * kappa2(d_focus)
}

/// Half-width of the forced-sharp band, `d_null_const / kappa`.
pub fn d_null(kappa: f64, params: &BlurParams) -> f64 {
    params.d_null_const / kappa
}

/// Radius of one pixel: `k * max(0, |d - d_focus| - d_null)` capped at
/// `r_max`, where `k` is `kappa`, reduced by the frontal factor in front of
/// the focus plane. The sharp band is symmetric around `d_focus`.
pub fn blur_radius(d: f32, d_focus: f32, kappa: f64, params: &BlurParams) -> f32 {
    let delta = d as f64 - d_focus as f64;
    let k = if delta > 0.0 {
        params.frontal_factor * kappa
    } else {
        kappa
    };
    let dn = d_null(kappa, params);
    let r = k * (delta.abs() - dn).max(0.0);
    (r as f32).clamp(0.0, params.r_max)
}

pub fn blur_radius_map(disparity: &FieldMap, d_focus: f32, kappa: f64, params: &BlurParams) -> FieldMap {
    disparity
        .map(|d| blur_radius(d, d_focus, kappa, params))
        .with_kind(FieldKind::Radius)
}
