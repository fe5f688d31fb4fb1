use crate::filter::local_mean_std;
use crate::image::{FieldKind, Image};
use crate::{Error, Result};

/// Local contrast normalization: `(v - mean) / (std + epsilon)` over an
/// edge-clamped `window x window` neighbourhood.
pub fn normalize_local(view: &Image, window: usize, epsilon: f32) -> Result<Image> {
    if view.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            found: view.channels(),
        });
    }
    if window % 2 == 0 {
        return Err(Error::InvalidParameter("normalization window must be odd".into()));
    }
    let field = view.channel(0, FieldKind::Generic);
    let (mean, std) = local_mean_std(&field, window);
    let eps = epsilon as f64;
    let mut out = view.clone();
    for ((v, m), s) in out.data_mut().iter_mut().zip(&mean).zip(&std) {
        *v = ((*v as f64 - m) / (s + eps)) as f32;
    }
    Ok(out)
}
