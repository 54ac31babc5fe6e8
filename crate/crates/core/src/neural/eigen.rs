use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Largest size handled by a full Schur decomposition before switching to
/// shifted power iteration.
pub const DENSE_EIGEN_MAX_DIM: usize = 512;
pub const EIGEN_TOL: f64 = 1e-8;
pub const EIGEN_MAX_ITERS: usize = 10_000;
const SCHUR_EPS: f64 = 4.0 * f64::EPSILON;

/// `Re(λ₁)` for the eigenvalue of `jac` with the largest real part.
///
/// Dense Schur decomposition up to [`DENSE_EIGEN_MAX_DIM`]; above that a
/// shifted power iteration, falling back to the dense path when it does not
/// converge (e.g. a complex dominant pair).
pub fn dominant_eigenvalue(jac: &DMatrix<f64>) -> Result<f64> {
    check_input(jac)?;
    if jac.nrows() <= DENSE_EIGEN_MAX_DIM {
        return dense_dominant_eigenvalue(jac);
    }
    match power_dominant_eigenvalue(jac, EIGEN_TOL, EIGEN_MAX_ITERS) {
        Some(lambda) => Ok(lambda),
        None => dense_dominant_eigenvalue(jac),
    }
}

fn check_input(jac: &DMatrix<f64>) -> Result<()> {
    if !jac.is_square() {
        return Err(Error::DimensionMismatch {
            what: "jacobian columns",
            expected: jac.nrows(),
            got: jac.ncols(),
        });
    }
    if jac.iter().any(|x| !x.is_finite()) {
        return Err(crate::error::invalid("jacobian", "entries must be finite"));
    }
    Ok(())
}

pub fn dense_dominant_eigenvalue(jac: &DMatrix<f64>) -> Result<f64> {
    check_input(jac)?;
    let dim = jac.nrows();
    if dim == 0 {
        return Err(crate::error::invalid("jacobian", "empty matrix"));
    }
    let schur = Schur::try_new(jac.clone(), SCHUR_EPS, EIGEN_MAX_ITERS)
        .ok_or(Error::EigenFailure { dim })?;
    schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .reduce(f64::max)
        .ok_or(Error::EigenFailure { dim })
}

/// Power iteration on `J + sI` with `s = ‖J‖∞`, so every shifted eigenvalue
/// has nonnegative real part. Returns `None` without convergence.
pub fn power_dominant_eigenvalue(jac: &DMatrix<f64>, tol: f64, max_iters: usize) -> Option<f64> {
    let dim = jac.nrows();
    let shift = jac
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut shifted = jac.clone();
    for i in 0..dim {
        shifted[(i, i)] += shift;
    }
    // Deterministic start with a small index-dependent tilt off any symmetric subspace.
    let mut v = DVector::from_fn(dim, |i, _| 1.0 + 1e-3 * ((i * 7919) % 101) as f64);
    v /= v.norm();
    let mut prev = f64::NAN;
    for _ in 0..max_iters {
        let w = &shifted * &v;
        let rayleigh = v.dot(&w);
        let residual = (&w - &v * rayleigh).norm();
        let norm = w.norm();
        if norm == 0.0 {
            return Some(-shift);
        }
        if residual <= tol * rayleigh.abs().max(1.0) && (rayleigh - prev).abs() <= tol {
            return Some(rayleigh - shift);
        }
        prev = rayleigh;
        v = w / norm;
    }
    None
}
