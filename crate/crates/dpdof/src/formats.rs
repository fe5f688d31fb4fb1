//! Calibration tables as JSON and noise banks as `F32M` tiles plus a JSON
//! manifest.

use std::fs;
use std::path::Path;

use dpdof_core::bokeh::NoiseBank;
use dpdof_core::lens::CalibTable;
use dpdof_core::FieldKind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_field, save_field};

#[derive(Debug, Serialize, Deserialize)]
struct CalibJson {
    focus_distances: Vec<f64>,
    grid: [usize; 2],
    #[serde(rename = "S")]
    slope: Vec<f64>,
    #[serde(rename = "I")]
    intercept: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    residual: Vec<f64>,
}

pub fn calib_to_json(table: &CalibTable) -> String {
    let doc = CalibJson {
        focus_distances: table.focus_distances.clone(),
        grid: [table.grid_w, table.grid_h],
        slope: table.slope.clone(),
        intercept: table.intercept.clone(),
        residual: table.residual_rms.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("plain numbers serialize")
}

pub fn calib_from_json(text: &str, path: &Path) -> Result<CalibTable> {
    let doc: CalibJson = serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    let table = CalibTable {
        focus_distances: doc.focus_distances,
        grid_w: doc.grid[0],
        grid_h: doc.grid[1],
        slope: doc.slope,
        intercept: doc.intercept,
        residual_rms: doc.residual,
    };
    table.validate().map_err(|e| Error::format(path, e.to_string()))?;
    Ok(table)
}

pub fn save_calib(table: &CalibTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, calib_to_json(table)).map_err(Error::io(path))
}

pub fn load_calib(path: impl AsRef<Path>) -> Result<CalibTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    calib_from_json(&text, path)
}

pub const NOISE_MANIFEST: &str = "noise_bank.json";

#[derive(Debug, Serialize, Deserialize)]
struct NoiseManifest {
    periods: Vec<usize>,
    patches: Vec<String>,
}

/// Writes `noise_bank.json` and one `patch_<period>.f32m` per tile into `dir`.
pub fn save_noise_bank(bank: &NoiseBank, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut names = Vec::new();
    for (patch, l) in bank.patches.iter().zip(&bank.periods) {
        let name = format!("patch_{l}.f32m");
        save_field(patch, dir.join(&name))?;
        names.push(name);
    }
    let manifest = NoiseManifest {
        periods: bank.periods.clone(),
        patches: names,
    };
    let path = dir.join(NOISE_MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("plain data serializes");
    fs::write(&path, text).map_err(Error::io(&path))
}

pub fn load_noise_bank(dir: impl AsRef<Path>) -> Result<NoiseBank> {
    let dir = dir.as_ref();
    let path = dir.join(NOISE_MANIFEST);
    let text = fs::read_to_string(&path).map_err(Error::io(&path))?;
    let manifest: NoiseManifest = serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if manifest.periods.len() != manifest.patches.len() {
        return Err(Error::format(&path, "one patch per period is required"));
    }
    let patches = manifest
        .patches
        .iter()
        .zip(&manifest.periods)
        .map(|(name, &l)| load_field(dir.join(name), FieldKind::Generic, Some((l, l))))
        .collect::<Result<Vec<_>>>()?;
    let bank = NoiseBank {
        patches,
        periods: manifest.periods,
    };
    bank.validate()?;
    Ok(bank)
}
