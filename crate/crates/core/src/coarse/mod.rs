//! Coarse-grained decision model over `r` clustered options, its two-option
//! scalar reduction and the bifurcation toolkit built on that reduction.

mod branches;
mod scalar;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::neural::{
    check_step_size, dense_dominant_eigenvalue, normalize_in_place, state_unchecked,
    DirectionField, NeuralState, SigmoidParams,
};

pub use branches::{
    bifurcation_analysis, equilibria, sweep_branches, write_branches_csv, BifurcationBranch,
    BifurcationSummary, BranchPoint, Equilibrium, BRANCH_JUMP_THRESHOLD, ROOT_GRID_POINTS,
    ROOT_MERGE_TOL, ROOT_TOL, SUMMARY_SCHEMA_VERSION,
};
pub use scalar::{
    bifurcation_condition, min_mu_star, mu_to_angle, normal_form_coefficients, scalar_rhs,
    scalar_rhs_dx, solve_mu_star, NormalForm, ScalarParams,
};

/// Options seen as unit directions with per-option cluster sizes `|C_s|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseConfig {
    params: SigmoidParams,
    cluster_sizes: Vec<f64>,
    directions: DirectionField,
}

impl CoarseConfig {
    pub fn new(
        params: SigmoidParams,
        cluster_sizes: Vec<f64>,
        directions: DirectionField,
    ) -> Result<Self> {
        if directions.len() < 2 {
            return Err(invalid("directions", "need at least two options"));
        }
        if cluster_sizes.len() != directions.len() {
            return Err(Error::DimensionMismatch {
                what: "cluster sizes",
                expected: directions.len(),
                got: cluster_sizes.len(),
            });
        }
        if cluster_sizes.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(invalid("cluster_sizes", "must be positive"));
        }
        Ok(Self {
            params,
            cluster_sizes,
            directions,
        })
    }

    /// Equal clusters, sizes absorbed into `a`.
    pub fn equal(params: SigmoidParams, directions: DirectionField) -> Result<Self> {
        let r = directions.len();
        Self::new(params, vec![1.0; r], directions)
    }

    /// Two options at angular separation `arccos(1 - mu)` with sizes
    /// `(1 + cbar, 1 - cbar)`; the coarse model whose shifted scalar
    /// reduction is [`scalar_rhs`].
    pub fn two_option(scalar: &ScalarParams) -> Result<Self> {
        if scalar.cbar().abs() >= 1.0 {
            return Err(invalid("cbar", "two-option embedding needs |cbar| < 1"));
        }
        let half = (1.0 - scalar.mu()).clamp(-1.0, 1.0).acos() / 2.0;
        Self::new(
            *scalar.sigmoid(),
            vec![1.0 + scalar.cbar(), 1.0 - scalar.cbar()],
            DirectionField::planar(&[half, -half]),
        )
    }

    pub fn options(&self) -> usize {
        self.directions.len()
    }

    pub fn params(&self) -> &SigmoidParams {
        &self.params
    }

    pub fn cluster_sizes(&self) -> &[f64] {
        &self.cluster_sizes
    }

    pub fn directions(&self) -> &DirectionField {
        &self.directions
    }

    /// `P̄ᵀ P̄ n̄`.
    fn saturation_input(&self, nbar: &[f64]) -> Vec<f64> {
        let cols = self.directions.columns();
        let mean = nbar
            .iter()
            .zip(cols)
            .fold(nalgebra::Vector3::zeros(), |acc, (&w, p)| acc + p * w);
        cols.iter().map(|p| p.dot(&mean)).collect()
    }

    fn check_len(&self, nbar: &[f64]) -> Result<()> {
        if nbar.len() != self.options() {
            return Err(Error::DimensionMismatch {
                what: "coarse state length",
                expected: self.options(),
                got: nbar.len(),
            });
        }
        Ok(())
    }
}

/// Unprojected coarse drift `-n̄ + C S(P̄ᵀ P̄ n̄)`.
pub fn coarse_field(nbar: &[f64], config: &CoarseConfig) -> Result<Vec<f64>> {
    config.check_len(nbar)?;
    let arg = config.saturation_input(nbar);
    Ok(nbar
        .iter()
        .zip(arg)
        .zip(&config.cluster_sizes)
        .map(|((&n, x), &c)| -n + c * config.params.value(x))
        .collect())
}

/// `Π_Δ(-n̄ + C S(P̄ᵀ P̄ n̄))`.
pub fn coarse_drift(nbar: &[f64], config: &CoarseConfig) -> Result<Vec<f64>> {
    let f = coarse_field(nbar, config)?;
    crate::neural::simplex_project(&f, nbar)
}

/// Discrete coarse update with the same update-then-normalize structure as
/// [`crate::neural::step`].
pub fn coarse_step(nbar: &NeuralState, config: &CoarseConfig, dt: f64) -> Result<NeuralState> {
    check_step_size(dt)?;
    let state = nbar.as_slice();
    config.check_len(state)?;
    let arg = config.saturation_input(state);
    let mut next: Vec<f64> = state
        .iter()
        .zip(arg)
        .zip(&config.cluster_sizes)
        .map(|((&n, x), &c)| (1.0 - dt) * n + dt * c * config.params.value(x))
        .collect();
    normalize_in_place(&mut next);
    Ok(state_unchecked(next))
}

/// Jacobian of [`coarse_drift`] at `nbar`.
pub fn coarse_jacobian(nbar: &[f64], config: &CoarseConfig) -> Result<DMatrix<f64>> {
    config.check_len(nbar)?;
    let r = config.options();
    let arg = config.saturation_input(nbar);
    let total: f64 = coarse_field(nbar, config)?.iter().sum();
    let cols = config.directions.columns();
    let inner = DMatrix::from_fn(r, r, |i, j| {
        let gram = cols[i].dot(&cols[j]);
        let d = if i == j { -1.0 } else { 0.0 };
        d + config.cluster_sizes[i] * config.params.derivative(arg[i]) * gram
    });
    let col_sums: Vec<f64> = inner.column_iter().map(|c| c.sum()).collect();
    Ok(DMatrix::from_fn(r, r, |i, j| {
        inner[(i, j)] - nbar[i] * col_sums[j] - if i == j { total } else { 0.0 }
    }))
}

/// `Re(λ₁)` of [`coarse_jacobian`].
pub fn coarse_dominant_eigenvalue(nbar: &[f64], config: &CoarseConfig) -> Result<f64> {
    dense_dominant_eigenvalue(&coarse_jacobian(nbar, config)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> SigmoidParams {
        SigmoidParams::new(0.8, 6.0).unwrap()
    }

    #[test]
    fn compromise_is_equilibrium() {
        let cfg = CoarseConfig::equal(params(), DirectionField::planar(&[0.7, -0.7])).unwrap();
        let f = coarse_drift(&[0.5, 0.5], &cfg).unwrap();
        assert!(f.iter().all(|x| x.abs() < 1e-15));

        let cfg = CoarseConfig::equal(
            params(),
            DirectionField::planar(&[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]),
        )
        .unwrap();
        let third = 1.0 / 3.0;
        let f = coarse_drift(&[third; 3], &cfg).unwrap();
        assert!(f.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = CoarseConfig::new(
            params(),
            vec![1.0, 1.4, 0.7],
            DirectionField::planar(&[0.4, -0.3, 1.9]),
        )
        .unwrap();
        let mut n: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = n.iter().sum();
        n.iter_mut().for_each(|x| *x /= s);
        let jac = coarse_jacobian(&n, &cfg).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut plus = n.clone();
            let mut minus = n.clone();
            plus[j] += h;
            minus[j] -= h;
            let fp = coarse_drift(&plus, &cfg).unwrap();
            let fm = coarse_drift(&minus, &cfg).unwrap();
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - jac[(i, j)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn coarse_step_normalizes() {
        let cfg = CoarseConfig::equal(params(), DirectionField::planar(&[1.0, -1.0])).unwrap();
        let n = NeuralState::new(vec![0.3, 0.7]).unwrap();
        let next = coarse_step(&n, &cfg, 0.5).unwrap();
        assert!((next.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(coarse_step(&n, &cfg, 1.01).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(CoarseConfig::equal(params(), DirectionField::planar(&[1.0])).is_err());
        assert!(
            CoarseConfig::new(params(), vec![1.0], DirectionField::planar(&[1.0, 2.0])).is_err()
        );
        assert!(CoarseConfig::new(
            params(),
            vec![1.0, 0.0],
            DirectionField::planar(&[1.0, 2.0])
        )
        .is_err());
    }
}
