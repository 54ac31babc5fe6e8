//! Simplex-constrained neural decision dynamics.
//!
//! Each neuron `i` carries a preferred unit direction `p_i` and receives a
//! nonnegative evidence value `u_i`. Neurons couple through the input-weighted
//! Gram matrix `W(u) = U Pᵀ P U`. The dynamics path never forms it and
//! accumulates `W(u) n` through the 3-vector `P U n` in `O(k)`.

mod eigen;
mod jacobian;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use eigen::{
    dense_dominant_eigenvalue, dominant_eigenvalue, power_dominant_eigenvalue, DENSE_EIGEN_MAX_DIM,
    EIGEN_MAX_ITERS, EIGEN_TOL,
};
pub use jacobian::{
    jacobian, low_rank_dominant_eigenvalue, simplex_tangent_block, JACOBIAN_DENSE_GRAM_MAX_DIM,
};

/// Tolerance on `1ᵀn = 1` accepted by [`NeuralState::new`].
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Tolerance on `‖p_i‖ = 1` accepted by [`DirectionField::new`].
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Default discrete neural step.
pub const DEFAULT_DT: f64 = 0.1;

/// Saturation `S(x) = a / (1 + exp(-alpha x))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    a: f64,
    alpha: f64,
}

impl SigmoidParams {
    pub fn new(a: f64, alpha: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(
                "a",
                format!("must be a positive finite real, got {a}"),
            ));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(
                "alpha",
                format!("must be a positive finite real, got {alpha}"),
            ));
        }
        Ok(Self { a, alpha })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.a / (1.0 + (-self.alpha * x).exp())
    }

    /// Exact derivative of [`Self::value`]: `(a alpha / 4) sech²(alpha x / 2)`.
    ///
    /// Evaluated as `alpha S (1 - S/a)`, which is the same function and does
    /// not overflow for large `|x|`.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let s = self.value(x);
        self.alpha * s * (1.0 - s / self.a)
    }
}

#[inline]
pub fn sigmoid(x: f64, params: &SigmoidParams) -> f64 {
    params.value(x)
}

/// Population firing rates, a point of the unit simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuralState(Vec<f64>);

impl NeuralState {
    pub fn new(n: Vec<f64>) -> Result<Self> {
        if n.len() < 2 {
            return Err(invalid(
                "n",
                format!("need at least 2 neurons, got {}", n.len()),
            ));
        }
        if let Some((i, v)) = n
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::NotOnSimplex(format!(
                "component {i} = {v} outside [0, 1]"
            )));
        }
        let total: f64 = n.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotOnSimplex(format!("components sum to {total}")));
        }
        Ok(Self(n))
    }

    /// The indecision start: every neuron at `1/k`.
    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(invalid("k", format!("need at least 2 neurons, got {k}")));
        }
        Ok(Self(vec![1.0 / k as f64; k]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Sum of the activity of the neurons in `indices`.
    pub fn mass(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices.into_iter().map(|i| self.0[i]).sum()
    }
}

impl AsRef<[f64]> for NeuralState {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Preferred unit directions, one per neuron (the columns of `P`).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionField(Vec<Vector3<f64>>);

impl DirectionField {
    pub fn new(p: Vec<Vector3<f64>>) -> Result<Self> {
        if let Some((i, v)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !((v.norm() - 1.0).abs() <= UNIT_NORM_TOL))
        {
            return Err(invalid(
                "directions",
                format!("column {i} has norm {}", v.norm()),
            ));
        }
        Ok(Self(p))
    }

    /// Normalizes every column; zero columns are rejected.
    pub fn from_unnormalized(p: Vec<Vector3<f64>>) -> Result<Self> {
        let cols = p
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.try_normalize(f64::MIN_POSITIVE)
                    .ok_or_else(|| invalid("directions", format!("column {i} is zero")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(cols))
    }

    /// Planar directions at the given headings (radians, counterclockwise from +x).
    pub fn planar(angles: &[f64]) -> Self {
        Self(
            angles
                .iter()
                .map(|t| Vector3::new(t.cos(), t.sin(), 0.0))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn columns(&self) -> &[Vector3<f64>] {
        &self.0
    }

    pub fn column(&self, i: usize) -> &Vector3<f64> {
        &self.0[i]
    }
}

/// Nonnegative per-neuron evidence (the diagonal of `U`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceField(Vec<f64>);

impl EvidenceField {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = u
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(invalid(
                "evidence",
                format!("component {i} = {v} is negative or not finite"),
            ));
        }
        Ok(Self(u))
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn ones(k: usize) -> Self {
        Self(vec![1.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn check_dims(u: &EvidenceField, p: &DirectionField, k: usize) -> Result<()> {
    if u.len() != k {
        return Err(Error::DimensionMismatch {
            what: "evidence length",
            expected: k,
            got: u.len(),
        });
    }
    if p.len() != k {
        return Err(Error::DimensionMismatch {
            what: "direction count",
            expected: k,
            got: p.len(),
        });
    }
    Ok(())
}

/// `P U n`, the evidence-weighted population vector.
#[inline]
fn population_vector(u: &[f64], p: &[Vector3<f64>], n: &[f64]) -> Vector3<f64> {
    u.iter()
        .zip(p)
        .zip(n)
        .fold(Vector3::zeros(), |acc, ((&ui, pi), &ni)| {
            acc + pi * (ui * ni)
        })
}

/// `W(u) n = Uᵀ (Pᵀ (P (U n)))` in `O(k)`.
pub fn coupling_apply(u: &EvidenceField, p: &DirectionField, n: &[f64]) -> Result<Vec<f64>> {
    check_dims(u, p, n.len())?;
    let m = population_vector(u.as_slice(), p.columns(), n);
    Ok(u.as_slice()
        .iter()
        .zip(p.columns())
        .map(|(&ui, pi)| ui * pi.dot(&m))
        .collect())
}

/// Unprojected drift `f(n) = -n + S(W(u) n)`.
pub fn drift(
    n: &[f64],
    u: &EvidenceField,
    p: &DirectionField,
    params: &SigmoidParams,
) -> Result<Vec<f64>> {
    let w_n = coupling_apply(u, p, n)?;
    Ok(n.iter()
        .zip(w_n)
        .map(|(&ni, x)| -ni + params.value(x))
        .collect())
}

/// `f - (1ᵀ f) n`. Tangent to the simplex whenever `1ᵀ n = 1`.
pub fn simplex_project(f: &[f64], n: &[f64]) -> Result<Vec<f64>> {
    if f.len() != n.len() {
        return Err(Error::DimensionMismatch {
            what: "projection operand",
            expected: n.len(),
            got: f.len(),
        });
    }
    let total: f64 = f.iter().sum();
    Ok(f.iter().zip(n).map(|(fi, ni)| fi - total * ni).collect())
}

/// Right-hand side of the continuous-time projected dynamics.
pub fn projected_rhs(
    n: &[f64],
    u: &EvidenceField,
    p: &DirectionField,
    params: &SigmoidParams,
) -> Result<Vec<f64>> {
    let f = drift(n, u, p, params)?;
    simplex_project(&f, n)
}

/// One discrete update: `n̂ = (1 - dt) n + dt S(W(u) n)`, then `n̂ / 1ᵀn̂`.
pub fn step(
    n: &NeuralState,
    u: &EvidenceField,
    p: &DirectionField,
    params: &SigmoidParams,
    dt: f64,
) -> Result<NeuralState> {
    check_step_size(dt)?;
    let state = n.as_slice();
    let w_n = coupling_apply(u, p, state)?;
    let mut next: Vec<f64> = state
        .iter()
        .zip(w_n)
        .map(|(&ni, x)| (1.0 - dt) * ni + dt * params.value(x))
        .collect();
    normalize_in_place(&mut next);
    Ok(NeuralState(next))
}

pub(crate) fn check_step_size(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(invalid("dt", format!("must lie in (0, 1], got {dt}")));
    }
    Ok(())
}

pub(crate) fn normalize_in_place(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
}

/// Wraps an already-normalized positive vector.
pub(crate) fn state_unchecked(n: Vec<f64>) -> NeuralState {
    NeuralState(n)
}

/// Zeroes every component not strictly above `g`.
pub fn threshold(n: &[f64], g: f64) -> Vec<f64> {
    n.iter().map(|&x| if x > g { x } else { 0.0 }).collect()
}

/// `v0 P ñ`.
pub fn velocity(n_thresh: &[f64], p: &DirectionField, v0: f64) -> Result<Vector3<f64>> {
    if n_thresh.len() != p.len() {
        return Err(Error::DimensionMismatch {
            what: "thresholded activity length",
            expected: p.len(),
            got: n_thresh.len(),
        });
    }
    Ok(n_thresh
        .iter()
        .zip(p.columns())
        .fold(Vector3::zeros(), |acc, (&w, pi)| acc + pi * w)
        * v0)
}
