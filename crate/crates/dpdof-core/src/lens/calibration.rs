use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::image::{FieldKind, FieldMap};
use crate::resample::sample_bilinear;
use crate::stereo::DisparityField;
use crate::{Error, Result};

/// One calibration capture: a fronto-parallel target at `target_depth`
/// photographed with the lens focused at `focus_distance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub focus_distance: f64,
    pub target_depth: f64,
    pub field: DisparityField,
}

/// Slope and intercept of the disparity vs inverse-depth line, per focus
/// distance and control point. Slices are row-major `grid_h x grid_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibTable {
    pub focus_distances: Vec<f64>,
    pub grid_w: usize,
    pub grid_h: usize,
    pub slope: Vec<f64>,
    pub intercept: Vec<f64>,
    /// RMS of the fit residual per control point; empty when unknown.
    pub residual_rms: Vec<f64>,
}

impl CalibTable {
    pub fn validate(&self) -> Result<()> {
        let n = self.focus_distances.len() * self.grid_w * self.grid_h;
        if self.focus_distances.is_empty() || self.grid_w < 2 || self.grid_h < 2 {
            return Err(Error::InvalidParameter("calibration table is empty".into()));
        }
        if self.slope.len() != n || self.intercept.len() != n {
            return Err(Error::InvalidParameter(alloc::format!(
                "calibration table expects {n} slope and intercept values"
            )));
        }
        if !self.residual_rms.is_empty() && self.residual_rms.len() != n {
            return Err(Error::InvalidParameter("residual table has the wrong length".into()));
        }
        if self.focus_distances.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::InvalidParameter(
                "focus distances must be strictly increasing".into(),
            ));
        }
        let slice = self.grid_w * self.grid_h;
        for s in self.slope.chunks(slice) {
            let pos = s.iter().all(|&v| v > 0.0);
            let neg = s.iter().all(|&v| v < 0.0);
            if !(pos || neg) {
                return Err(Error::InvalidParameter(
                    "slopes change sign within a focus distance".into(),
                ));
            }
        }
        Ok(())
    }

    fn slice(&self, k: usize) -> (&[f64], &[f64]) {
        let n = self.grid_w * self.grid_h;
        (&self.slope[k * n..(k + 1) * n], &self.intercept[k * n..(k + 1) * n])
    }
}

/// Weighted least squares line `d = I + S * x`; `None` when degenerate.
fn fit_line(points: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if !(sw > 0.0) {
        return None;
    }
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 1e-18 * sw) {
        return None;
    }
    let s = sxy / sxx;
    let i = my - s * mx;
    let rss: f64 = points
        .iter()
        .map(|p| p.2 * (p.1 - i - s * p.0) * (p.1 - i - s * p.0))
        .sum();
    Some((s, i, libm::sqrt(rss / sw)))
}

/// Bilinear lattice coordinate of pixel `p` along an axis of `n` pixels and
/// `g` control points: lower index, upper index and fraction. Corner control
/// points sit on the corner pixels.
#[inline]
fn lattice_coord(p: usize, n: usize, g: usize) -> (usize, usize, f64) {
    let u = if n <= 1 {
        0.0
    } else {
        p as f64 * (g - 1) as f64 / (n - 1) as f64
    };
    let a = (libm::floor(u) as usize).min(g - 1);
    let b = (a + 1).min(g - 1);
    (a, b, u - a as f64)
}

/// Control-lattice values whose bilinear interpolation best fits the field
/// in the confidence-weighted least-squares sense, with the confidence mass
/// each control point received. A faint membrane term keeps points without
/// data defined by their neighbours. Returns `None` when the field carries
/// no confidence at all.
fn lattice_fit(field: &DisparityField, gw: usize, gh: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let (w, h) = field.dims();
    let n = gw * gh;
    let mut ata = DMatrix::<f64>::zeros(n, n);
    let mut atb = DVector::<f64>::zeros(n);
    let mut mass = vec![0.0f64; n];
    let xs: Vec<_> = (0..w).map(|x| lattice_coord(x, w, gw)).collect();
    for y in 0..h {
        let (y0, y1, fy) = lattice_coord(y, h, gh);
        for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
            let c = field.confidence.get(x, y) as f64;
            if c <= 0.0 {
                continue;
            }
            let d = field.disparity.get(x, y) as f64;
            let taps = [
                (y0 * gw + x0, (1.0 - fx) * (1.0 - fy)),
                (y0 * gw + x1, fx * (1.0 - fy)),
                (y1 * gw + x0, (1.0 - fx) * fy),
                (y1 * gw + x1, fx * fy),
            ];
            for &(i, bi) in &taps {
                if bi == 0.0 {
                    continue;
                }
                mass[i] += c * bi;
                atb[i] += c * bi * d;
                for &(j, bj) in &taps {
                    ata[(i, j)] += c * bi * bj;
                }
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mu = 1e-6 * total / n as f64;
    for gy in 0..gh {
        for gx in 0..gw {
            let i = gy * gw + gx;
            for (nx, ny) in [(gx + 1, gy), (gx, gy + 1)] {
                if nx < gw && ny < gh {
                    let j = ny * gw + nx;
                    ata[(i, i)] += mu;
                    ata[(j, j)] += mu;
                    ata[(i, j)] -= mu;
                    ata[(j, i)] -= mu;
                }
            }
        }
    }
    let values = ata.cholesky()?.solve(&atb);
    Some((values.iter().copied().collect(), mass))
}

/// Confidence-weighted mean disparity and total confidence of a field.
fn field_mean(field: &DisparityField) -> (f64, f64) {
    let (mut s, mut w) = (0.0f64, 0.0f64);
    for (d, c) in field.disparity.data().iter().zip(field.confidence.data()) {
        if *c > 0.0 {
            s += *c as f64 * *d as f64;
            w += *c as f64;
        }
    }
    (if w > 0.0 { s / w } else { 0.0 }, w)
}

/// Fits slope and intercept of disparity against inverse target depth for
/// every control point of a `grid_w x grid_h` lattice, separately for every
/// focus distance present in `captures`.
///
/// Each capture is first reduced to the control-lattice values whose
/// bilinear interpolation best matches it (confidence-weighted). Per control
/// point the line is then fitted by least squares across depths, weighted by
/// the confidence mass the point received. A point without two usable depths
/// inherits the fit of the whole frame.
pub fn fit_calibration(captures: &[Capture], grid_w: usize, grid_h: usize) -> Result<CalibTable> {
    if grid_w < 2 || grid_h < 2 {
        return Err(Error::InvalidParameter("control grid needs at least 2x2 points".into()));
    }
    let mut zs: Vec<f64> = captures.iter().map(|c| c.focus_distance).collect();
    zs.sort_by(|a, b| a.total_cmp(b));
    zs.dedup();
    if zs.is_empty() {
        return Err(Error::InvalidParameter("no calibration captures".into()));
    }
    let n = grid_w * grid_h;
    let mut slope = Vec::with_capacity(zs.len() * n);
    let mut intercept = Vec::with_capacity(zs.len() * n);
    let mut residual = Vec::with_capacity(zs.len() * n);
    for &z in &zs {
        let group: Vec<&Capture> = captures.iter().filter(|c| c.focus_distance == z).collect();
        let mut depths: Vec<f64> = group.iter().map(|c| c.target_depth).collect();
        depths.sort_by(|a, b| a.total_cmp(b));
        depths.dedup();
        if depths.len() < 2 {
            return Err(Error::InsufficientDepths {
                focus_distance: z,
                found: depths.len(),
            });
        }
        let global_pts: Vec<(f64, f64, f64)> = group
            .iter()
            .map(|c| {
                let (m, w) = field_mean(&c.field);
                (1.0 / c.target_depth, m, w)
            })
            .collect();
        let global = fit_line(&global_pts).ok_or(Error::InsufficientDepths {
            focus_distance: z,
            found: 1,
        })?;
        let lattices: Vec<(f64, Option<(Vec<f64>, Vec<f64>)>)> = group
            .iter()
            .map(|c| (1.0 / c.target_depth, lattice_fit(&c.field, grid_w, grid_h)))
            .collect();
        for k in 0..n {
            let pts: Vec<(f64, f64, f64)> = lattices
                .iter()
                .filter_map(|(x, l)| l.as_ref().map(|(v, m)| (*x, v[k], m[k])))
                .collect();
            let (s, i, r) = fit_line(&pts).unwrap_or(global);
            slope.push(s);
            intercept.push(i);
            residual.push(r);
        }
    }
    let table = CalibTable {
        focus_distances: zs,
        grid_w,
        grid_h,
        slope,
        intercept,
        residual_rms: residual,
    };
    Ok(table)
}

/// Full-resolution slope and intercept maps for one focus distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibMaps {
    pub slope: FieldMap,
    pub intercept: FieldMap,
    /// Set when the focus distance lay outside the calibrated range.
    pub clamped: bool,
}

/// Interpolates the table linearly in focus distance (clamping at the ends)
/// and bilinearly over the control lattice, whose corner points sit on the
/// corner pixels of a `width x height` image.
pub fn interpolate_calib(table: &CalibTable, z: f64, width: usize, height: usize) -> CalibMaps {
    let zs = &table.focus_distances;
    let last = zs.len() - 1;
    let (k0, k1, t, clamped) = if z <= zs[0] {
        (0, 0, 0.0, z < zs[0])
    } else if z >= zs[last] {
        (last, last, 0.0, z > zs[last])
    } else {
        let k = zs.iter().rposition(|&v| v <= z).unwrap_or(0);
        if zs[k] == z {
            (k, k, 0.0, false)
        } else {
            (k, k + 1, (z - zs[k]) / (zs[k + 1] - zs[k]), false)
        }
    };
    let (s0, i0) = table.slice(k0);
    let (s1, i1) = table.slice(k1);
    let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + (b - a) * t).collect()
    };
    let s = mix(s0, s1);
    let i = mix(i0, i1);
    let (gw, gh) = (table.grid_w, table.grid_h);
    let xs: Vec<_> = (0..width).map(|x| lattice_coord(x, width, gw)).collect();
    let ys: Vec<_> = (0..height).map(|y| lattice_coord(y, height, gh)).collect();
    let sample = |v: &[f64], (x0, x1, fx): (usize, usize, f64), (y0, y1, fy): (usize, usize, f64)| {
        let top = v[y0 * gw + x0] + (v[y0 * gw + x1] - v[y0 * gw + x0]) * fx;
        let bot = v[y1 * gw + x0] + (v[y1 * gw + x1] - v[y1 * gw + x0]) * fx;
        (top + (bot - top) * fy) as f32
    };
    let mut sm = Vec::with_capacity(width * height);
    let mut im = Vec::with_capacity(width * height);
    for &yc in &ys {
        for &xc in &xs {
            sm.push(sample(&s, xc, yc));
            im.push(sample(&i, xc, yc));
        }
    }
    CalibMaps {
        slope: FieldMap::from_vec(width, height, sm, FieldKind::Generic),
        intercept: FieldMap::from_vec(width, height, im, FieldKind::Generic),
        clamped,
    }
}

/// Slope and intercept at the geometric image centre.
pub fn center_values(maps: &CalibMaps) -> (f64, f64) {
    let (w, h) = maps.slope.dims();
    let cx = (w - 1) as f32 * 0.5;
    let cy = (h - 1) as f32 * 0.5;
    (
        sample_bilinear(&maps.slope, cx, cy) as f64,
        sample_bilinear(&maps.intercept, cx, cy) as f64,
    )
}

/// Maps every pixel's disparity onto the line of the image centre:
/// `I_c + S_c * (d - I(x)) / S(x)`. Pixels with `|S(x)| < 1e-6` keep their
/// disparity and lose their confidence.
pub fn correct_disparity(
    field: &DisparityField,
    slope: &FieldMap,
    intercept: &FieldMap,
    s_center: f64,
    i_center: f64,
) -> Result<DisparityField> {
    slope.ensure_dims(field.dims())?;
    intercept.ensure_dims(field.dims())?;
    let mut out = field.clone();
    let d = out.disparity.data_mut();
    let c = out.confidence.data_mut();
    for (k, (s, i)) in slope.data().iter().zip(intercept.data()).enumerate() {
        let s = *s as f64;
        if s.abs() < 1e-6 {
            c[k] = 0.0;
            continue;
        }
        d[k] = (i_center + s_center * (d[k] as f64 - *i as f64) / s) as f32;
    }
    Ok(out)
}
