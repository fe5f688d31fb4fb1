use alloc::vec::Vec;

use crate::edgeaware::FaceRect;
use crate::image::FieldMap;
use crate::stereo::median_of;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusParams {
    /// A face is trusted only when its median |disparity| is at most this.
    pub face_threshold: f32,
    /// Side of the square window around a tap.
    pub tap_window: usize,
}

impl Default for FocusParams {
    fn default() -> Self {
        Self {
            face_threshold: 1.0,
            tap_window: 64,
        }
    }
}

fn region_median(field: &FieldMap, x0: usize, y0: usize, x1: usize, y1: usize) -> Option<f32> {
    let mut v: Vec<f32> = (y0..y1)
        .flat_map(|y| (x0..x1).map(move |x| (x, y)))
        .map(|(x, y)| field.get(x, y))
        .collect();
    median_of(&mut v)
}

/// Disparity to keep in focus: the face median when it is close to zero,
/// otherwise the median around the tap, otherwise zero (trust autofocus).
/// Regions are clipped to the image.
pub fn select_focus(
    disparity: &FieldMap,
    face: Option<&FaceRect>,
    tap: Option<(usize, usize)>,
    params: &FocusParams,
) -> f32 {
    let (w, h) = disparity.dims();
    if let Some(r) = face.and_then(|f| f.clamped(w, h)) {
        if let Some(m) = region_median(disparity, r.x0, r.y0, r.x1, r.y1) {
            if m.abs() <= params.face_threshold {
                return m;
            }
        }
    }
    if let Some((tx, ty)) = tap {
        let half = params.tap_window / 2;
        let tx = tx.min(w - 1);
        let ty = ty.min(h - 1);
        let x0 = tx.saturating_sub(half);
        let y0 = ty.saturating_sub(half);
        let x1 = (tx + params.tap_window - half).min(w);
        let y1 = (ty + params.tap_window - half).min(h);
        if let Some(m) = region_median(disparity, x0, y0, x1, y1) {
            return m;
        }
    }
    0.0
}
