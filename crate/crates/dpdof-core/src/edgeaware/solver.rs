use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::image::{FieldMap, Image};
use crate::{Error, Result};

/// Parameters of the bilateral-space solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    /// Grid spacing along x and y, in pixels of the solve resolution.
    pub sigma_spatial: f32,
    pub sigma_luma: f32,
    pub sigma_chroma: f32,
    /// Smoothness weight.
    pub lambda: f32,
    pub max_iterations: usize,
    /// Relative residual at which conjugate gradients stops.
    pub tolerance: f64,
    /// Weak pull of every vertex towards its mean target, per pixel it owns.
    /// Keeps the system definite where no pixel is confident.
    pub ridge: f64,
    pub bistochastic_iterations: usize,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            sigma_spatial: 8.0,
            sigma_luma: 0.12,
            sigma_chroma: 0.12,
            lambda: 4.0,
            max_iterations: 200,
            tolerance: 1e-5,
            ridge: 1e-5,
            bistochastic_iterations: 20,
        }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if pos(self.sigma_spatial as f64)
            && pos(self.sigma_luma as f64)
            && pos(self.sigma_chroma as f64)
            && pos(self.lambda as f64)
            && pos(self.tolerance)
            && self.ridge >= 0.0
            && self.max_iterations > 0
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!(
                "invalid bilateral parameters {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final residual norm relative to the right-hand side.
    pub residual: f64,
    pub converged: bool,
}

/// Grid coordinates of a guide pixel: position, luma and two chroma axes.
///
/// Luma is the channel mean; chroma is `(R - luma, B - luma)`. Single
/// channel guides have zero chroma.
pub fn guide_features(guide: &Image, x: usize, y: usize) -> [f32; 5] {
    let (l, u, v) = if guide.channels() >= 3 {
        let (r, g, b) = (guide.get(x, y, 0), guide.get(x, y, 1), guide.get(x, y, 2));
        let l = (r + g + b) / 3.0;
        (l, r - l, b - l)
    } else {
        (guide.get(x, y, 0), 0.0, 0.0)
    };
    [x as f32, y as f32, l, u, v]
}

/// Sparse 5-D bilateral grid with nearest-vertex splatting.
#[derive(Debug, Clone)]
pub struct BilateralGrid {
    width: usize,
    height: usize,
    /// Vertex owning each pixel.
    vertex_of: Vec<u32>,
    /// Pixels per vertex.
    counts: Vec<f64>,
    /// Unordered neighbour pairs `(i, j)`, `i < j`, one step apart along one axis.
    edges: Vec<(u32, u32)>,
}

impl BilateralGrid {
    pub fn new(guide: &Image, params: &BilateralParams) -> Self {
        let (w, h) = guide.dims();
        let scale = [
            params.sigma_spatial,
            params.sigma_spatial,
            params.sigma_luma,
            params.sigma_chroma,
            params.sigma_chroma,
        ];
        let mut index: BTreeMap<[i64; 5], u32> = BTreeMap::new();
        let mut keys: Vec<[i64; 5]> = Vec::new();
        let mut vertex_of = Vec::with_capacity(w * h);
        let mut counts: Vec<f64> = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let f = guide_features(guide, x, y);
                let mut key = [0i64; 5];
                for d in 0..5 {
                    key[d] = libm::roundf(f[d] / scale[d]) as i64;
                }
                let id = *index.entry(key).or_insert_with(|| {
                    keys.push(key);
                    counts.push(0.0);
                    (keys.len() - 1) as u32
                });
                counts[id as usize] += 1.0;
                vertex_of.push(id);
            }
        }
        let mut edges = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            for d in 0..5 {
                let mut k = *key;
                k[d] += 1;
                if let Some(&j) = index.get(&k) {
                    edges.push((i as u32, j));
                }
            }
        }
        Self {
            width: w,
            height: h,
            vertex_of,
            counts,
            edges,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn vertex_count(&self) -> usize {
        self.counts.len()
    }

    pub fn vertex_of(&self) -> &[u32] {
        &self.vertex_of
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Sums pixel values into their vertices.
    pub fn splat(&self, values: impl IntoIterator<Item = f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.vertex_count()];
        for (&v, x) in self.vertex_of.iter().zip(values) {
            out[v as usize] += x;
        }
        out
    }

    /// Reads every pixel's value from its vertex.
    pub fn slice(&self, vertex_values: &[f64]) -> Vec<f64> {
        self.vertex_of.iter().map(|&v| vertex_values[v as usize]).collect()
    }

    /// `[1 2 1]` blur summed over the five axes: `2 * 5 * v_i + sum of neighbours`.
    pub fn blur(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|x| 10.0 * x).collect();
        for &(i, j) in &self.edges {
            out[i as usize] += v[j as usize];
            out[j as usize] += v[i as usize];
        }
        out
    }

    /// Normalization `n` such that `diag(n) B diag(n)` has row sums close to
    /// the vertex pixel counts.
    pub fn bistochastize(&self, iterations: usize) -> Vec<f64> {
        let m = &self.counts;
        let mut n = vec![1.0; m.len()];
        for _ in 0..iterations {
            let bn = self.blur(&n);
            for ((ni, mi), bi) in n.iter_mut().zip(m).zip(&bn) {
                *ni = libm::sqrt(*ni * mi / bi);
            }
        }
        n
    }
}

/// The bilateral-space quadratic for one guide image.
///
/// With vertex values `ŷ`, pixel values `y = Sᵀŷ` and the bistochastized
/// affinity `Ŵ = diag(n) B diag(n)`, the solver minimizes
///
/// `λ/2 Σ_ij Ŵ_ij (ŷ_i − ŷ_j)² + Σ_p c_p (y_p − t_p)² + ε Σ_i m_i (ŷ_i − t̄_i)²`
///
/// where `m_i` counts the pixels of vertex `i` and `t̄_i` is their mean
/// target. The smoothness term is an exact graph Laplacian, so constants are
/// exact minimizers.
#[derive(Debug, Clone)]
pub struct BilateralSolver {
    grid: BilateralGrid,
    /// Edge weights `n_i n_j` aligned with `grid.edges()`.
    weights: Vec<f64>,
    /// Laplacian diagonal `Σ_j Ŵ_ij`.
    degree: Vec<f64>,
    params: BilateralParams,
}

impl BilateralSolver {
    pub fn new(guide: &Image, params: &BilateralParams) -> Result<Self> {
        params.validate()?;
        let grid = BilateralGrid::new(guide, params);
        let n = grid.bistochastize(params.bistochastic_iterations);
        let weights: Vec<f64> = grid
            .edges()
            .iter()
            .map(|&(i, j)| n[i as usize] * n[j as usize])
            .collect();
        let mut degree = vec![0.0; grid.vertex_count()];
        for (&(i, j), &w) in grid.edges().iter().zip(&weights) {
            degree[i as usize] += w;
            degree[j as usize] += w;
        }
        Ok(Self {
            grid,
            weights,
            degree,
            params: *params,
        })
    }

    pub fn grid(&self) -> &BilateralGrid {
        &self.grid
    }

    /// Edge weights of the bistochastized affinity, aligned with the grid's edges.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn laplacian(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().zip(&self.degree).map(|(x, d)| x * d).collect();
        for (&(i, j), &w) in self.grid.edges().iter().zip(&self.weights) {
            out[i as usize] -= w * v[j as usize];
            out[j as usize] -= w * v[i as usize];
        }
        out
    }

    /// Solves for vertex values. `x0` is a starting guess in vertex space;
    /// by default every vertex starts at its confidence-weighted mean target.
    pub fn solve_vertices(
        &self,
        target: &FieldMap,
        confidence: &FieldMap,
        x0: Option<&[f64]>,
    ) -> Result<(Vec<f64>, SolveReport)> {
        let dims = self.grid.dims();
        target.ensure_dims(dims)?;
        confidence.ensure_dims(dims)?;
        let nv = self.grid.vertex_count();
        if let Some(x) = x0 {
            if x.len() != nv {
                return Err(Error::InvalidParameter("starting guess has the wrong length".into()));
            }
        }
        let c: Vec<f64> = confidence.data().iter().map(|&v| (v as f64).max(0.0)).collect();
        let t: Vec<f64> = target.data().iter().map(|&v| v as f64).collect();
        // Solve for the deviation from a reference level so that shifting the
        // target shifts the answer exactly.
        let csum: f64 = c.iter().sum();
        let shift = if csum > 0.0 {
            c.iter().zip(&t).map(|(c, t)| c * t).sum::<f64>() / csum
        } else {
            t.iter().sum::<f64>() / t.len() as f64
        };
        let tc: Vec<f64> = t.iter().map(|v| v - shift).collect();

        let counts = self.grid.counts();
        let sc = self.grid.splat(c.iter().copied());
        let sct = self.grid.splat(c.iter().zip(&tc).map(|(c, t)| c * t));
        let tbar: Vec<f64> = self
            .grid
            .splat(tc.iter().copied())
            .iter()
            .zip(counts)
            .map(|(s, m)| s / m)
            .collect();
        let eps = self.params.ridge;
        let lambda = self.params.lambda as f64;
        let diag: Vec<f64> = (0..nv)
            .map(|i| lambda * self.degree[i] + sc[i] + eps * counts[i])
            .collect();
        let b: Vec<f64> = (0..nv).map(|i| sct[i] + eps * counts[i] * tbar[i]).collect();
        let apply = |v: &[f64]| -> Vec<f64> {
            let lv = self.laplacian(v);
            (0..nv).map(|i| lambda * lv[i] + (sc[i] + eps * counts[i]) * v[i]).collect()
        };

        let mut x: Vec<f64> = match x0 {
            Some(x) => x.iter().map(|v| v - shift).collect(),
            None => (0..nv)
                .map(|i| if sc[i] > 0.0 { sct[i] / sc[i] } else { tbar[i] })
                .collect(),
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>();
        let bnorm = libm::sqrt(dot(&b, &b)).max(1e-300);
        let ax = apply(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut rel = libm::sqrt(dot(&r, &r)) / bnorm;
        let tol = self.params.tolerance;
        let mut iterations = 0;
        if rel > tol {
            let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
            let mut p = z.clone();
            let mut rz = dot(&r, &z);
            while iterations < self.params.max_iterations {
                let ap = apply(&p);
                let pap = dot(&p, &ap);
                if !(pap > 0.0) {
                    break;
                }
                let alpha = rz / pap;
                for i in 0..nv {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * ap[i];
                }
                iterations += 1;
                rel = libm::sqrt(dot(&r, &r)) / bnorm;
                if rel <= tol {
                    break;
                }
                for i in 0..nv {
                    z[i] = r[i] / diag[i];
                }
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for i in 0..nv {
                    p[i] = z[i] + beta * p[i];
                }
            }
        }
        x.iter_mut().for_each(|v| *v += shift);
        Ok((
            x,
            SolveReport {
                iterations,
                residual: rel,
                converged: rel <= tol,
            },
        ))
    }

    /// Solves and slices the result back to pixels.
    pub fn solve(&self, target: &FieldMap, confidence: &FieldMap) -> Result<(FieldMap, SolveReport)> {
        let (x, report) = self.solve_vertices(target, confidence, None)?;
        let (w, h) = self.grid.dims();
        let data = self.grid.slice(&x).into_iter().map(|v| v as f32).collect();
        Ok((FieldMap::from_vec(w, h, data, target.kind()), report))
    }
}

/// Edge-aware smoothing of `target` weighted by `confidence`, guided by
/// `guide` (RGB or single channel, linear intensities).
pub fn bilateral_solve(
    target: &FieldMap,
    confidence: &FieldMap,
    guide: &Image,
    params: &BilateralParams,
) -> Result<(FieldMap, SolveReport)> {
    BilateralSolver::new(guide, params)?.solve(target, confidence)
}
