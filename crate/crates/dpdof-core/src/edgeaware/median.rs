use alloc::vec::Vec;

use crate::image::FieldMap;

/// Median of the edge-clamped 3x3 neighbourhood of every pixel.
pub fn median3x3(map: &FieldMap) -> FieldMap {
    let (w, h) = map.dims();
    let mut out = Vec::with_capacity(w * h);
    let mut win = [0.0f32; 9];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut k = 0;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    win[k] = map.get_clamped(x + dx, y + dy);
                    k += 1;
                }
            }
            win.sort_unstable_by(|a, b| a.total_cmp(b));
            out.push(win[4]);
        }
    }
    FieldMap::from_vec(w, h, out, map.kind())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::FieldKind;
    use alloc::vec;

    #[test]
    fn removes_spike() {
        let mut f = FieldMap::filled(5, 5, 1.0, FieldKind::Generic);
        f.set(2, 2, 100.0);
        assert!(median3x3(&f).data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn matches_sorting_oracle() {
        let f = FieldMap::from_fn(8, 8, FieldKind::Generic, |x, y| ((x * 13 + y * 29 + x * y) % 17) as f32);
        let m = median3x3(&f);
        for y in 0..8isize {
            for x in 0..8isize {
                let mut v = vec![];
                for yy in [y - 1, y, y + 1] {
                    for xx in [x - 1, x, x + 1] {
                        v.push(f.get(xx.clamp(0, 7) as usize, yy.clamp(0, 7) as usize));
                    }
                }
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(m.get(x as usize, y as usize), v[4]);
            }
        }
    }
}
