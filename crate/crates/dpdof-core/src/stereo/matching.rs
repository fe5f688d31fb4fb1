use alloc::vec;
use alloc::vec::Vec;

use super::confidence::{tile_confidence, ConfidenceTerms};
use super::StereoParams;
use crate::image::Image;
use crate::{Error, Result};

/// Per-tile disparities and confidences at DP resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid {
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub tile_size: usize,
    /// Dimensions of the DP views the grid was computed from.
    pub source_width: usize,
    pub source_height: usize,
    /// Subpixel disparity per tile, clamped to the search range.
    pub disparity: Vec<f32>,
    pub confidence: Vec<f32>,
    /// `2 * search + 1` SSD values per tile, from shift `-search` upwards.
    pub ssd: Vec<f32>,
    pub terms: Vec<ConfidenceTerms>,
}

impl TileGrid {
    #[inline]
    pub fn index(&self, tx: usize, ty: usize) -> usize {
        ty * self.tiles_x + tx
    }

    pub fn curve_len(&self) -> usize {
        self.ssd.len() / (self.tiles_x * self.tiles_y)
    }

    pub fn ssd_curve(&self, tx: usize, ty: usize) -> &[f32] {
        let n = self.curve_len();
        let i = self.index(tx, ty);
        &self.ssd[i * n..(i + 1) * n]
    }

    /// True when the tile lies completely inside the views.
    pub fn is_full(&self, tx: usize, ty: usize) -> bool {
        (tx + 1) * self.tile_size <= self.source_width && (ty + 1) * self.tile_size <= self.source_height
    }
}

/// Offset of the parabola vertex through `(-1, a)`, `(0, b)`, `(1, c)`.
///
/// The denominator is formed as `(a + c) - 2b` so a mirrored curve yields
/// exactly the negated offset.
#[inline]
fn parabola_offset(a: f64, b: f64, c: f64) -> f64 {
    let denom = (a + c) - 2.0 * b;
    if denom <= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// Half-open range of columns whose compared samples, and the normalization
/// windows around them, stay inside a view of width `w` for every shift.
pub fn matched_columns(w: usize, params: &StereoParams) -> Option<(usize, usize)> {
    let search = params.search as isize;
    let half = (params.norm_window / 2) as isize;
    let (mut lo, mut hi) = (half, w as isize - 1 - half);
    for s in -search..=search {
        let a = s.div_euclid(2);
        lo = lo.max(half + a).max(half + a - s);
        hi = hi.min(w as isize - 1 - half + a).min(w as isize - 1 - half + a - s);
    }
    (hi >= lo).then_some((lo as usize, hi as usize + 1))
}

/// Tile-wise horizontal SSD search between two normalized views.
///
/// For every shift `s` the comparison pairs `left(x - a)` with
/// `right(x - a + s)` where `a = floor(s / 2)`, so the compared pixel pairs
/// are centred on the tile for every shift. This makes the SSD curve of an
/// integer displacement exactly symmetric about its minimum and makes
/// swapping the views exactly mirror the curve.
///
/// Columns where some shift would compare a sample whose normalization
/// window leaves the views are left out of every shift's sum, so border tiles see fewer pixels but the
/// same pixels for every shift.
///
/// Positive disparity means the left view content must move by `+d` to
/// line up with the right view.
pub fn tile_match(left: &Image, right: &Image, params: &StereoParams) -> Result<TileGrid> {
    if left.dims() != right.dims() {
        return Err(Error::DimensionMismatch {
            expected: left.dims(),
            found: right.dims(),
        });
    }
    if left.channels() != 1 || right.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            found: left.channels().max(right.channels()),
        });
    }
    let ts = params.tile_size;
    let (w, h) = left.dims();
    if ts == 0 || w < ts || h < ts {
        return Err(Error::InvalidParameter(alloc::format!(
            "views {w}x{h} smaller than one {ts}x{ts} tile"
        )));
    }
    let search = params.search as isize;
    let n_shift = 2 * params.search + 1;
    let tiles_x = w.div_ceil(ts);
    let tiles_y = h.div_ceil(ts);
    let n_tiles = tiles_x * tiles_y;
    let l = left.data();
    let r = right.data();
    let cx = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let (x_lo, x_hi) = match matched_columns(w, params) {
        Some((lo, hi)) => (lo as isize, hi as isize - 1),
        None => (0, -1),
    };

    let mut disparity = vec![0.0f32; n_tiles];
    let mut ssd_all = vec![0.0f32; n_tiles * n_shift];
    let mut grad_energy = vec![0.0f32; n_tiles];
    let mut area = vec![0usize; n_tiles];
    let mut valid = vec![false; n_tiles];

    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let t = ty * tiles_x + tx;
            let full = (tx + 1) * ts <= w && (ty + 1) * ts <= h;
            if !full {
                continue;
            }
            let x0 = ((tx * ts) as isize).max(x_lo);
            let x1 = ((tx * ts + ts) as isize).min(x_hi + 1);
            if x1 <= x0 {
                continue;
            }
            let y0 = ty * ts;
            area[t] = (x1 - x0) as usize * ts;
            let curve = &mut ssd_all[t * n_shift..(t + 1) * n_shift];
            let mut curve64 = vec![0.0f64; n_shift];
            for (k, s) in (-search..=search).enumerate() {
                let a = s.div_euclid(2);
                let mut acc = 0.0f64;
                for y in y0..y0 + ts {
                    let row = y * w;
                    for x in x0..x1 {
                        let lv = l[row + cx(x - a)] as f64;
                        let rv = r[row + cx(x - a + s)] as f64;
                        let d = lv - rv;
                        acc += d * d;
                    }
                }
                curve64[k] = acc;
                curve[k] = acc as f32;
            }
            let mut g = 0.0f32;
            for y in y0..y0 + ts {
                let row = y * w;
                for x in x0..x1 {
                    let d = 0.5 * (l[row + cx(x + 1)] - l[row + cx(x - 1)]);
                    g += d * d;
                }
            }
            grad_energy[t] = g;

            let (lo, hi) = curve64
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if g <= 0.0 || hi - lo <= 1e-12 * (1.0 + hi) {
                continue;
            }
            valid[t] = true;
            // Ties prefer the smaller |shift|, then the negative side.
            let centre = params.search;
            let mut best = centre;
            for dist in 1..=params.search {
                for k in [centre - dist, centre + dist] {
                    if curve64[k] < curve64[best] {
                        best = k;
                    }
                }
            }
            let mut d = best as f64 - centre as f64;
            if best > 0 && best + 1 < n_shift {
                d += parabola_offset(curve64[best - 1], curve64[best], curve64[best + 1]);
            }
            disparity[t] = d.clamp(-(params.search as f64), params.search as f64) as f32;
        }
    }

    let mut confidence = vec![0.0f32; n_tiles];
    let mut terms = vec![
        ConfidenceTerms {
            grad: 0.0,
            unique: 0.0,
            resid: 0.0,
            agree: 0.0,
        };
        n_tiles
    ];
    let mut neighbors = Vec::with_capacity(8);
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let t = ty * tiles_x + tx;
            if !valid[t] {
                continue;
            }
            neighbors.clear();
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = tx as isize + dx;
                    let ny = ty as isize + dy;
                    if nx < 0 || ny < 0 || nx >= tiles_x as isize || ny >= tiles_y as isize {
                        continue;
                    }
                    let n = ny as usize * tiles_x + nx as usize;
                    if valid[n] {
                        neighbors.push(disparity[n]);
                    }
                }
            }
            let c = tile_confidence(
                &ssd_all[t * n_shift..(t + 1) * n_shift],
                grad_energy[t],
                area[t],
                disparity[t],
                &neighbors,
                params,
            );
            terms[t] = c;
            confidence[t] = c.product();
        }
    }

    Ok(TileGrid {
        tiles_x,
        tiles_y,
        tile_size: ts,
        source_width: w,
        source_height: h,
        disparity,
        confidence,
        ssd: ssd_all,
        terms,
    })
}
