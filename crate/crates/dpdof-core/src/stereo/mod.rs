//! Dual-pixel disparity: local normalization, tile SSD matching with
//! quadratic subpixel refinement, per-tile confidence and tile-to-pixel
//! upsampling.

mod confidence;
mod matching;
mod normalize;
mod upsample;

use alloc::vec::Vec;

pub use confidence::{tile_confidence, ConfidenceTerms};
pub(crate) use confidence::median as median_of;
pub use matching::{matched_columns, tile_match, TileGrid};
pub use normalize::normalize_local;
pub use upsample::upsample_tiles;

use crate::image::{FieldKind, FieldMap, Image};
use crate::{Error, Result};

/// Tunables of the matcher. Defaults are the values the pipeline ships with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoParams {
    /// Side of the local normalization window (odd).
    pub norm_window: usize,
    /// Added to the local standard deviation before dividing.
    pub norm_epsilon: f32,
    pub tile_size: usize,
    /// Integer search range `[-search, search]` in DP pixels.
    pub search: usize,
    /// Gradient-energy scale of the texture confidence.
    pub tau_grad: f32,
    /// Residual scale of the match-quality confidence.
    pub tau_resid: f32,
    /// Squared-disparity scale of the neighbour-agreement confidence.
    pub agree_scale: f32,
}

impl Default for StereoParams {
    fn default() -> Self {
        Self {
            norm_window: 9,
            norm_epsilon: 0.001,
            tile_size: 8,
            search: 3,
            tau_grad: 0.01,
            tau_resid: 0.04,
            agree_scale: 0.25,
        }
    }
}

/// Two half-aperture views at DP resolution plus their integer scale to the
/// colour image.
#[derive(Debug, Clone, PartialEq)]
pub struct DpPair {
    pub left: Image,
    pub right: Image,
    pub scale_x: usize,
    pub scale_y: usize,
}

impl DpPair {
    pub fn new(left: Image, right: Image, scale_x: usize, scale_y: usize) -> Result<Self> {
        if left.channels() != 1 {
            return Err(Error::ChannelMismatch {
                expected: 1,
                found: left.channels(),
            });
        }
        if right.channels() != 1 {
            return Err(Error::ChannelMismatch {
                expected: 1,
                found: right.channels(),
            });
        }
        if left.dims() != right.dims() {
            return Err(Error::DimensionMismatch {
                expected: left.dims(),
                found: right.dims(),
            });
        }
        if scale_x == 0 || scale_y == 0 {
            return Err(Error::InvalidParameter("DP scale factors must be >= 1".into()));
        }
        Ok(Self {
            left,
            right,
            scale_x,
            scale_y,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.left.dims()
    }
}

/// Per-pixel disparity (DP pixels) with a confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityField {
    pub disparity: FieldMap,
    pub confidence: FieldMap,
}

impl DisparityField {
    pub fn new(disparity: FieldMap, confidence: FieldMap) -> Result<Self> {
        confidence.ensure_dims(disparity.dims())?;
        Ok(Self {
            disparity: disparity.with_kind(FieldKind::Disparity),
            confidence: confidence.with_kind(FieldKind::Confidence),
        })
    }

    pub fn uniform(width: usize, height: usize, disparity: f32, confidence: f32) -> Self {
        Self {
            disparity: FieldMap::filled(width, height, disparity, FieldKind::Disparity),
            confidence: FieldMap::filled(width, height, confidence, FieldKind::Confidence),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.disparity.dims()
    }
}

/// Pixel-wise mean of several pre-aligned DP pairs; a stand-in for burst merging.
pub fn mean_of_pairs(pairs: &[DpPair]) -> Result<DpPair> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no DP pairs to merge".into()))?;
    let n = pairs.len() as f32;
    let mut left: Vec<f32> = alloc::vec![0.0; first.left.data().len()];
    let mut right = left.clone();
    for p in pairs {
        if p.dims() != first.dims() {
            return Err(Error::DimensionMismatch {
                expected: first.dims(),
                found: p.dims(),
            });
        }
        left.iter_mut().zip(p.left.data()).for_each(|(a, b)| *a += b);
        right.iter_mut().zip(p.right.data()).for_each(|(a, b)| *a += b);
    }
    left.iter_mut().for_each(|v| *v /= n);
    right.iter_mut().for_each(|v| *v /= n);
    let (w, h) = first.dims();
    let cs = first.left.colorspace();
    DpPair::new(
        Image::new(w, h, 1, left, cs)?,
        Image::new(w, h, 1, right, cs)?,
        first.scale_x,
        first.scale_y,
    )
}

/// Normalizes both views, matches tiles and upsamples to `out_width x out_height`.
///
/// Output pixels whose DP column was never compared by the matcher get zero
/// confidence; their disparity is extrapolated from the nearest tiles.
pub fn compute_disparity(
    pair: &DpPair,
    params: &StereoParams,
    out_width: usize,
    out_height: usize,
) -> Result<(TileGrid, DisparityField)> {
    let l = normalize_local(&pair.left, params.norm_window, params.norm_epsilon)?;
    let r = normalize_local(&pair.right, params.norm_window, params.norm_epsilon)?;
    let grid = tile_match(&l, &r, params)?;
    let mut field = upsample_tiles(&grid, out_width, out_height);
    let (lo, hi) = matched_columns(grid.source_width, params).unwrap_or((0, 0));
    let ratio = grid.source_width as f32 / out_width as f32;
    let unseen: Vec<bool> = (0..out_width)
        .map(|x| {
            let dp = (x as f32 + 0.5) * ratio - 0.5;
            dp < lo as f32 || dp > (hi as f32 - 1.0)
        })
        .collect();
    for row in field.confidence.data_mut().chunks_exact_mut(out_width) {
        for (c, &u) in row.iter_mut().zip(&unseen) {
            if u {
                *c = 0.0;
            }
        }
    }
    Ok((grid, field))
}
