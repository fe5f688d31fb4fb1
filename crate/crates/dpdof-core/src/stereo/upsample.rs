use alloc::vec::Vec;


use super::{DisparityField, TileGrid};
use crate::image::{FieldKind, FieldMap};

/// Tile-grid coordinate of each output pixel along one axis.
fn axis(out: usize, src: usize, tile: usize, tiles: usize) -> Vec<(usize, usize, f32)> {
    let centre = (tile as f32 - 1.0) * 0.5;
    (0..out)
        .map(|i| {
            let dp = (i as f32 + 0.5) * src as f32 / out as f32 - 0.5;
            let t = ((dp - centre) / tile as f32).clamp(0.0, (tiles - 1) as f32);
            let t0 = libm::floorf(t) as usize;
            let t1 = (t0 + 1).min(tiles - 1);
            (t0, t1, t - t0 as f32)
        })
        .collect()
}

/// Bilinearly interpolates tile disparity and confidence to an output grid.
///
/// Tile centres sit at DP position `tile * i + (tile - 1) / 2`; output pixel
/// centres are mapped into DP coordinates by the ratio of the grid's source
/// size to the output size. Disparity and confidence are interpolated
/// independently.
pub fn upsample_tiles(grid: &TileGrid, out_width: usize, out_height: usize) -> DisparityField {
    let xs = axis(out_width, grid.source_width, grid.tile_size, grid.tiles_x);
    let ys = axis(out_height, grid.source_height, grid.tile_size, grid.tiles_y);
    let tw = grid.tiles_x;
    let lerp2 = |v: &[f32], (x0, x1, fx): (usize, usize, f32), (y0, y1, fy): (usize, usize, f32)| {
        let top = v[y0 * tw + x0] + (v[y0 * tw + x1] - v[y0 * tw + x0]) * fx;
        let bot = v[y1 * tw + x0] + (v[y1 * tw + x1] - v[y1 * tw + x0]) * fx;
        top + (bot - top) * fy
    };
    let mut d = Vec::with_capacity(out_width * out_height);
    let mut c = Vec::with_capacity(out_width * out_height);
    for &yt in &ys {
        for &xt in &xs {
            d.push(lerp2(&grid.disparity, xt, yt));
            c.push(lerp2(&grid.confidence, xt, yt));
        }
    }
    DisparityField {
        disparity: FieldMap::from_vec(out_width, out_height, d, FieldKind::Disparity),
        confidence: FieldMap::from_vec(out_width, out_height, c, FieldKind::Confidence),
    }
}
