//! Dual-pixel depth-of-field core.
//!
//! Pure algorithms for turning a dual-pixel (DP) view pair and a colour image
//! into a synthetically defocused rendering:
//!
//! - [`image`], [`resample`], [`color`], [`filter`]: containers and the
//!   small set of image operations shared by every stage.
//! - [`stereo`]: local normalization, tile SSD matching with subpixel
//!   refinement, confidences and tile-to-pixel upsampling.
//! - [`lens`]: thin-lens disparity relations, spatially varying calibration
//!   and the synthetic DP capture generator.
//! - [`edgeaware`]: bilateral-grid solver, mask refinement, mask/disparity
//!   fusion and disparity smoothing.
//! - [`bokeh`]: focus selection, blur radii, layer decomposition, the brute
//!   and gradient-domain disk blurs, compositing and synthetic noise.
//!
//! The crate is `no_std` and only needs `alloc`. All file formats, the CLI
//! and thread-level parallelism live in the companion `dpdof` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bokeh;
pub mod color;
pub mod edgeaware;
mod error;
pub mod filter;
pub mod image;
pub mod lens;
pub mod resample;
pub mod stereo;

pub use error::{Error, Result};
pub use image::{ColorSpace, FieldKind, FieldMap, Image, RgbaImage};
