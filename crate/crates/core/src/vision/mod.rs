//! Analytic visual front-end: a pinhole camera with equal-angle pixel rays,
//! sphere visibility, bilinear pooling onto the neural grid and an
//! optical-flow motion detector.

mod camera;
mod evidence;
mod motion;
mod resample;

use crate::error::{Error, Result};
use crate::neural::EvidenceField;

pub use camera::{pixel_rays, CameraModel};
pub use evidence::{render_evidence, SphereTarget};
pub use motion::{
    fit_affine_background, motion_evidence, AffineFlow, FlowField, DEFAULT_RATIO_THRESHOLD,
    DEFAULT_WINDOW,
};
pub use resample::{downsample, sample_coordinate};

/// Row-major 2-D field of scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "grid data length",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn to_evidence(&self) -> Result<EvidenceField> {
        EvidenceField::new(self.data.clone())
    }
}
