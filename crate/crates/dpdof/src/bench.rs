//! Timing harness for the two disk blurs.

use std::io::Write;
use std::time::Instant;

use dpdof_core::bokeh::{scatter_blur_brute, scatter_blur_gradient};
use dpdof_core::{FieldKind, FieldMap, RgbaImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain clone of the layer, the floor any blur is compared against.
    Copy,
    Brute,
    Gradient,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Copy => "copy",
            Method::Brute => "brute",
            Method::Gradient => "gradient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    /// Side of the square layer.
    pub size: usize,
    pub radius: f32,
    pub method: Method,
    /// Median wall time over the repetitions.
    pub ms: f64,
}

pub fn random_layer(size: usize, seed: u64) -> RgbaImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RgbaImage::from_fn(size, size, |_, _| {
        let a: f32 = rng.random();
        [a * rng.random::<f32>(), a * rng.random::<f32>(), a * rng.random::<f32>(), a]
    })
}

fn median_ms(reps: usize, mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let s = Instant::now();
            f();
            s.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    t.sort_by(|a, b| a.total_cmp(b));
    t[t.len() / 2]
}

/// Times copy, brute-force and gradient-domain blurs of random square
/// layers with a constant radius map.
pub fn bench_blur(sizes: &[usize], radii: &[f32], reps: usize) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &size in sizes {
        let layer = random_layer(size, size as u64);
        for &radius in radii {
            let r = FieldMap::filled(size, size, radius, FieldKind::Radius);
            let mut run = |method: Method| {
                let ms = median_ms(reps, || {
                    let out = match method {
                        Method::Copy => layer.clone(),
                        Method::Brute => scatter_blur_brute(&layer, &r).expect("matching dims"),
                        Method::Gradient => scatter_blur_gradient(&layer, &r).expect("matching dims"),
                    };
                    std::hint::black_box(out);
                });
                rows.push(BenchRow {
                    size,
                    radius,
                    method,
                    ms,
                });
            };
            run(Method::Copy);
            run(Method::Brute);
            run(Method::Gradient);
        }
    }
    rows
}

pub fn write_csv(rows: &[BenchRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "size,radius,method,ms")?;
    for r in rows {
        writeln!(out, "{},{},{},{:.4}", r.size, r.radius, r.method.name(), r.ms)?;
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of time against radius for one method and size.
pub fn radius_slope(rows: &[BenchRow], size: usize, method: Method) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.size == size && r.method == method && r.radius > 0.0)
        .map(|r| (r.radius as f64, r.ms))
        .collect();
    loglog_slope(&pts)
}

/// Slope of time against image area for one method and radius.
pub fn area_slope(rows: &[BenchRow], radius: f32, method: Method) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.radius == radius && r.method == method)
        .map(|r| ((r.size * r.size) as f64, r.ms))
        .collect();
    loglog_slope(&pts)
}
