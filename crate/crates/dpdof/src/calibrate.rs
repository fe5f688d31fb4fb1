//! Calibration from a manifest of captures.
//!
//! A manifest lists one capture per line as
//! `focus_distance target_depth left_view right_view` (meters, then paths
//! relative to the manifest). Blank lines and `#` comments are skipped.

use std::fs;
use std::path::{Path, PathBuf};

use dpdof_core::lens::{fit_calibration, CalibTable, Capture};
use dpdof_core::stereo::{compute_disparity, DpPair, StereoParams};
use dpdof_core::{ColorSpace, FieldKind};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::load_image;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub line: usize,
    pub focus_distance: f64,
    pub target_depth: f64,
    pub left: PathBuf,
    pub right: PathBuf,
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<ManifestEntry>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Manifest {
            path: path.into(),
            line,
            message,
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad(format!(
                "expected `focus_distance target_depth left right`, found {} field(s) in {content:?}",
                fields.len()
            )));
        }
        let number = |s: &str, what: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(bad(format!("{what} {s:?} is not a positive number"))),
            }
        };
        out.push(ManifestEntry {
            line,
            focus_distance: number(fields[0], "focus distance")?,
            target_depth: number(fields[1], "target depth")?,
            left: base.join(fields[2]),
            right: base.join(fields[3]),
        });
    }
    if out.is_empty() {
        return Err(Error::Manifest {
            path: path.into(),
            line: 0,
            message: "manifest lists no captures".into(),
        });
    }
    Ok(out)
}

fn load_view(path: &Path) -> Result<dpdof_core::Image> {
    Ok(load_image(path, ColorSpace::Linear)?
        .channel(0, FieldKind::Generic)
        .into_image())
}

/// Matches every capture at DP resolution and fits the table.
pub fn calibrate_entries(entries: &[ManifestEntry], stereo: &StereoParams, grid_w: usize, grid_h: usize) -> Result<CalibTable> {
    let captures = entries
        .par_iter()
        .map(|e| -> Result<Capture> {
            let pair = DpPair::new(load_view(&e.left)?, load_view(&e.right)?, 1, 1)?;
            let (w, h) = pair.dims();
            let (_, field) = compute_disparity(&pair, stereo, w, h)?;
            Ok(Capture {
                focus_distance: e.focus_distance,
                target_depth: e.target_depth,
                field,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = captures.windows(2).find(|w| w[0].field.dims() != w[1].field.dims()) {
        return Err(dpdof_core::Error::DimensionMismatch {
            expected: w[0].field.dims(),
            found: w[1].field.dims(),
        }
        .into());
    }
    Ok(fit_calibration(&captures, grid_w, grid_h)?)
}

pub fn calibrate_manifest(path: impl AsRef<Path>, stereo: &StereoParams, grid_w: usize, grid_h: usize) -> Result<CalibTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let entries = parse_manifest(&text, path)?;
    calibrate_entries(&entries, stereo, grid_w, grid_h)
}
