use super::Grid;
use crate::error::{invalid, Result};

/// Source coordinate sampled by output index `dst` when resizing `src_len`
/// cells onto `dst_len` (cell centres aligned, clamped to the source).
pub fn sample_coordinate(dst: usize, src_len: usize, dst_len: usize) -> f64 {
    let scale = src_len as f64 / dst_len as f64;
    ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64)
}

/// Bilinear resampling of `field` onto a `k_h × k_w` grid.
pub fn downsample(field: &Grid, k_h: usize, k_w: usize) -> Result<Grid> {
    if k_h == 0 || k_w == 0 {
        return Err(invalid("neural grid", "needs at least one cell"));
    }
    if k_h > field.rows() || k_w > field.cols() {
        return Err(invalid(
            "neural grid",
            format!(
                "{k_h}x{k_w} exceeds native {}x{}",
                field.rows(),
                field.cols()
            ),
        ));
    }
    let taps = |dst: usize, src_len: usize, dst_len: usize| {
        let s = sample_coordinate(dst, src_len, dst_len);
        let lo = s.floor() as usize;
        let hi = (lo + 1).min(src_len - 1);
        (lo, hi, s - lo as f64)
    };
    let cols: Vec<_> = (0..k_w).map(|c| taps(c, field.cols(), k_w)).collect();
    Ok(Grid::from_fn(k_h, k_w, |r, c| {
        let (r0, r1, fr) = taps(r, field.rows(), k_h);
        let (c0, c1, fc) = cols[c];
        let top = field.get(r0, c0) * (1.0 - fc) + field.get(r0, c1) * fc;
        let bottom = field.get(r1, c0) * (1.0 - fc) + field.get(r1, c1) * fc;
        top * (1.0 - fr) + bottom * fr
    }))
}
