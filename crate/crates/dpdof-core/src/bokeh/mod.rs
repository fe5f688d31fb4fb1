//! From disparity to pixels: focus selection, blur radii, band layers, the
//! brute-force and gradient-domain disk blurs, compositing, the mask-only
//! renderer and synthetic noise.

mod bands;
mod brute;
mod composite;
mod focus;
mod gradient;
mod mask_render;
mod noise;
mod radius;
mod render;

pub use bands::{band_cutoffs, decompose_layers, BandCutoffs, LayerStack, BAND_COUNT};
pub use brute::{disk_norm, disk_weight, scatter_blur_brute};
pub use composite::{composite, over, sharp_layer, UNPREMULTIPLY_EPS};
pub use focus::{select_focus, FocusParams};
pub use gradient::{scatter_blur_gradient, DiskProfile};
pub use mask_render::{blur_background, mask_blur_render, vertical_ramp};
pub use noise::{
    blur_weight_from_radius, build_noise_bank, inject_noise, noise_sigma_map, periodic_patch, NoiseBank,
    NoiseBankParams,
};
pub use radius::{
    blur_radius, blur_radius_map, d_null, kappa, kappa1, kappa2, BlurParams, D_NULL_DEFAULT, D_NULL_PERSON,
};
pub use render::{blur_layer, finish_layers, plan_layers, render_layered, RenderPlan};
