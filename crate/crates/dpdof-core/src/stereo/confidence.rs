use super::StereoParams;

/// The four confidence cues of a tile. The tile confidence is their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceTerms {
    /// Horizontal texture energy.
    pub grad: f32,
    /// Distinctness of the best match against the best non-adjacent local minimum.
    pub unique: f32,
    /// Residual SSD at the best match.
    pub resid: f32,
    /// Agreement with the median of the neighbouring tiles.
    pub agree: f32,
}

impl ConfidenceTerms {
    pub fn product(&self) -> f32 {
        (self.grad * self.unique * self.resid * self.agree).clamp(0.0, 1.0)
    }
}

/// Lowest local minimum of `ssd` at least two shifts away from `best`.
fn second_minimum(ssd: &[f32], best: usize) -> Option<f32> {
    let n = ssd.len();
    (0..n)
        .filter(|&i| i.abs_diff(best) >= 2)
        .filter(|&i| {
            (i == 0 || ssd[i] <= ssd[i - 1]) && (i + 1 == n || ssd[i] <= ssd[i + 1])
        })
        .map(|i| ssd[i])
        .reduce(f32::min)
}

pub(crate) fn median(values: &mut [f32]) -> Option<f32> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Confidence cues of one tile.
///
/// `ssd` is the integer-shift SSD curve, `grad_energy` the sum of squared
/// horizontal gradients over the tile, `neighbors` the disparities of the
/// valid surrounding tiles.
pub fn tile_confidence(
    ssd: &[f32],
    grad_energy: f32,
    tile_area: usize,
    disparity: f32,
    neighbors: &[f32],
    params: &StereoParams,
) -> ConfidenceTerms {
    let area = tile_area as f32;
    let grad = (grad_energy / (area * params.tau_grad)).min(1.0);
    let (best, &smin) = ssd
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty SSD curve");
    let unique = match second_minimum(ssd, best) {
        Some(s2) => ((s2 - smin) / (s2 + 1e-6)).clamp(0.0, 1.0),
        None => 1.0,
    };
    let resid = libm::expf(-smin.max(0.0) / (area * params.tau_resid));
    let mut nb = neighbors.to_vec();
    let agree = match median(&mut nb) {
        Some(m) => libm::expf(-(disparity - m) * (disparity - m) / params.agree_scale),
        None => 1.0,
    };
    ConfidenceTerms {
        grad,
        unique,
        resid,
        agree,
    }
}
