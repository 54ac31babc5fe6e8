//! Foreground motion from dense optical flow: remove a robustly fitted affine
//! background field, then flag pixels whose residual magnitude stands out
//! against the spread of residuals in their neighbourhood.

use nalgebra::{Matrix3, Vector2, Vector3};

use super::Grid;
use crate::error::{invalid, Error, Result};

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_RATIO_THRESHOLD: f64 = 3.0;
/// Residuals above this many RMS residuals are dropped before the refit.
const OUTLIER_SIGMAS: f64 = 2.0;

/// Per-pixel flow vectors (pixels/frame), row-major; `x` along columns.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    rows: usize,
    cols: usize,
    data: Vec<Vector2<f64>>,
}

impl FlowField {
    pub fn new(rows: usize, cols: usize, data: Vec<Vector2<f64>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "flow data length",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(invalid("flow", "entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Vector2<f64>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Vector2<f64> {
        self.data[r * self.cols + c]
    }

    /// Splits into `(x, y)` component grids for CSV export.
    pub fn components(&self) -> (Grid, Grid) {
        (
            Grid::from_fn(self.rows, self.cols, |r, c| self.get(r, c).x),
            Grid::from_fn(self.rows, self.cols, |r, c| self.get(r, c).y),
        )
    }

    pub fn from_components(x: &Grid, y: &Grid) -> Result<Self> {
        if x.rows() != y.rows() || x.cols() != y.cols() {
            return Err(invalid("flow", "component grids differ in shape"));
        }
        let data = x
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(&a, &b)| Vector2::new(a, b))
            .collect();
        Self::new(x.rows(), x.cols(), data)
    }
}

/// `I_bg(x, y) = A [x, y, 1]ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFlow {
    pub x_coeffs: Vector3<f64>,
    pub y_coeffs: Vector3<f64>,
    /// True when the fit was rank-deficient and the mean flow was used.
    pub degenerate: bool,
}

impl AffineFlow {
    pub fn eval(&self, r: usize, c: usize) -> Vector2<f64> {
        let b = Vector3::new(c as f64, r as f64, 1.0);
        Vector2::new(self.x_coeffs.dot(&b), self.y_coeffs.dot(&b))
    }
}

fn least_squares(flow: &FlowField, keep: &[bool]) -> AffineFlow {
    let mut normal = Matrix3::zeros();
    let mut rhs_x = Vector3::zeros();
    let mut rhs_y = Vector3::zeros();
    let mut mean = Vector2::zeros();
    let mut count = 0usize;
    for r in 0..flow.rows {
        for c in 0..flow.cols {
            if !keep[r * flow.cols + c] {
                continue;
            }
            let b = Vector3::new(c as f64, r as f64, 1.0);
            let v = flow.get(r, c);
            normal += b * b.transpose();
            rhs_x += b * v.x;
            rhs_y += b * v.y;
            mean += v;
            count += 1;
        }
    }
    let mean = if count > 0 {
        mean / count as f64
    } else {
        Vector2::zeros()
    };
    let fallback = AffineFlow {
        x_coeffs: Vector3::new(0.0, 0.0, mean.x),
        y_coeffs: Vector3::new(0.0, 0.0, mean.y),
        degenerate: true,
    };
    // Rank check on the normalized normal matrix.
    let scale = normal.diagonal().max().max(1.0);
    let sv = (normal / scale).singular_values();
    if count < 3 || sv.min() < 1e-12 * sv.max() {
        return fallback;
    }
    match normal.cholesky() {
        Some(ch) => AffineFlow {
            x_coeffs: ch.solve(&rhs_x),
            y_coeffs: ch.solve(&rhs_y),
            degenerate: false,
        },
        None => fallback,
    }
}

/// Two-pass least squares: fit everything, drop residuals above `2σ` (RMS
/// residual magnitude), refit on the rest.
pub fn fit_affine_background(flow: &FlowField) -> AffineFlow {
    let all = vec![true; flow.rows * flow.cols];
    let first = least_squares(flow, &all);
    let residuals: Vec<f64> = (0..flow.rows * flow.cols)
        .map(|i| (flow.data[i] - first.eval(i / flow.cols, i % flow.cols)).norm())
        .collect();
    let rms = (residuals.iter().map(|m| m * m).sum::<f64>() / residuals.len().max(1) as f64).sqrt();
    let keep: Vec<bool> = residuals
        .iter()
        .map(|&m| m <= OUTLIER_SIGMAS * rms)
        .collect();
    least_squares(flow, &keep)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Binary motion-evidence grid (`1` = foreground motion).
///
/// The residual magnitude is normalized by its global median (by its mean
/// when the median vanishes). A pixel is flagged when its normalized
/// magnitude exceeds `ratio_threshold` times the standard deviation of the
/// normalized magnitudes in the `window × window` neighbourhood (clipped at
/// the border). Residuals at round-off level are never flagged.
pub fn motion_evidence(flow: &FlowField, window: usize, ratio_threshold: f64) -> Result<Grid> {
    if window < 3 || window % 2 == 0 {
        return Err(invalid(
            "window",
            format!("must be odd and at least 3, got {window}"),
        ));
    }
    if !(ratio_threshold.is_finite() && ratio_threshold > 0.0) {
        return Err(invalid("ratio_threshold", "must be positive"));
    }
    let (rows, cols) = (flow.rows, flow.cols);
    let background = fit_affine_background(flow);
    let magnitude: Vec<f64> = (0..rows * cols)
        .map(|i| (flow.data[i] - background.eval(i / cols, i % cols)).norm())
        .collect();

    let flow_scale = flow
        .data
        .iter()
        .map(|v| v.x.abs().max(v.y.abs()))
        .fold(0.0, f64::max);
    let floor = 1e-9 * (1.0 + flow_scale);
    let med = median(&magnitude);
    let mean = magnitude.iter().sum::<f64>() / magnitude.len().max(1) as f64;
    let scale = if med > floor {
        med
    } else if mean > floor {
        mean
    } else {
        1.0
    };
    let norm: Vec<f64> = magnitude.iter().map(|m| m / scale).collect();
    let norm_floor = floor / scale;

    let half = window / 2;
    Ok(Grid::from_fn(rows, cols, |r, c| {
        let value = norm[r * cols + c];
        if value <= norm_floor {
            return 0.0;
        }
        let (r0, r1) = (r.saturating_sub(half), (r + half).min(rows - 1));
        let (c0, c1) = (c.saturating_sub(half), (c + half).min(cols - 1));
        let cells = ((r1 - r0 + 1) * (c1 - c0 + 1)) as f64;
        let mut local_mean = 0.0;
        for rr in r0..=r1 {
            for cc in c0..=c1 {
                local_mean += norm[rr * cols + cc];
            }
        }
        local_mean /= cells;
        let mut var = 0.0;
        for rr in r0..=r1 {
            for cc in c0..=c1 {
                let d = norm[rr * cols + cc] - local_mean;
                var += d * d;
            }
        }
        let local_std = (var / cells).sqrt();
        if value > ratio_threshold * local_std {
            1.0
        } else {
            0.0
        }
    }))
}
