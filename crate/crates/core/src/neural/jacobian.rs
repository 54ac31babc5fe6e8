use nalgebra::{DMatrix, Matrix4};

use super::{check_dims, drift, eigen, DirectionField, EvidenceField, SigmoidParams};
use crate::error::Result;

/// Above this population size the Gram matrix is not materialized and the
/// Jacobian is filled column by column from directional products.
pub const JACOBIAN_DENSE_GRAM_MAX_DIM: usize = 4096;

/// Jacobian of `n ↦ f(n) - (1ᵀ f(n)) n` at `n`:
///
/// `J = (I - n 1ᵀ)(-I + diag(S'(W n)) W) - (1ᵀ f) I`.
///
/// `n` need not lie on the simplex, which lets finite differences probe
/// off-simplex directions.
pub fn jacobian(
    n: &[f64],
    u: &EvidenceField,
    p: &DirectionField,
    params: &SigmoidParams,
) -> Result<DMatrix<f64>> {
    let k = n.len();
    check_dims(u, p, k)?;
    let weighted: Vec<_> = u
        .as_slice()
        .iter()
        .zip(p.columns())
        .map(|(&ui, pi)| pi * ui)
        .collect();
    let arg = super::coupling_apply(u, p, n)?;
    let slope: Vec<f64> = arg.iter().map(|&x| params.derivative(x)).collect();
    let total_drift: f64 = drift(n, u, p, params)?.iter().sum();

    // Inner derivative df/dn = -I + diag(S') W.
    let mut inner = if k <= JACOBIAN_DENSE_GRAM_MAX_DIM {
        let q = DMatrix::from_fn(3, k, |r, c| weighted[c][r]);
        let mut w = q.transpose() * &q;
        for (i, mut row) in w.row_iter_mut().enumerate() {
            row *= slope[i];
        }
        w
    } else {
        let mut m = DMatrix::zeros(k, k);
        for j in 0..k {
            let wj = weighted[j];
            for i in 0..k {
                m[(i, j)] = slope[i] * weighted[i].dot(&wj);
            }
        }
        m
    };
    for i in 0..k {
        inner[(i, i)] -= 1.0;
    }

    let col_sums: Vec<f64> = inner.column_iter().map(|c| c.sum()).collect();
    let mut jac = inner;
    for j in 0..k {
        for i in 0..k {
            jac[(i, j)] -= n[i] * col_sums[j];
        }
        jac[(j, j)] -= total_drift;
    }
    Ok(jac)
}

/// Dominant real part of the Jacobian spectrum without forming the `k × k`
/// matrix.
///
/// Because `P` has three rows, `J + (1 + 1ᵀf) I = L Rᵀ` with
/// `L = [n | (I - n 1ᵀ) diag(S') U Pᵀ]` and `R = [1 | U Pᵀ]`, both `k × 4`.
/// The spectrum of `J` is therefore `-(1 + 1ᵀf)` (with multiplicity at
/// least `k - 4`) together with `-(1 + 1ᵀf) + eig(Rᵀ L)`.
pub fn low_rank_dominant_eigenvalue(
    n: &[f64],
    u: &EvidenceField,
    p: &DirectionField,
    params: &SigmoidParams,
) -> Result<f64> {
    let k = n.len();
    check_dims(u, p, k)?;
    if k <= 4 {
        return eigen::dense_dominant_eigenvalue(&jacobian(n, u, p, params)?);
    }
    let arg = super::coupling_apply(u, p, n)?;
    let total_drift: f64 = n
        .iter()
        .zip(&arg)
        .map(|(&ni, &x)| -ni + params.value(x))
        .sum();
    let shift = -(1.0 + total_drift);

    // Column sums 1ᵀ diag(S') U Pᵀ.
    let mut slope_pop = nalgebra::Vector3::zeros();
    let mut rows: Vec<([f64; 4], [f64; 4])> = Vec::with_capacity(k);
    for i in 0..k {
        let ui = u.as_slice()[i];
        let pi = p.column(i) * ui;
        let si = params.derivative(arg[i]);
        slope_pop += pi * si;
        // (R row, partial L row); L's projected part is completed below.
        rows.push((
            [1.0, pi.x, pi.y, pi.z],
            [n[i], si * pi.x, si * pi.y, si * pi.z],
        ));
    }
    let mut small = Matrix4::<f64>::zeros();
    for (i, (r, l)) in rows.iter().enumerate() {
        let l_row = [
            l[0],
            l[1] - n[i] * slope_pop.x,
            l[2] - n[i] * slope_pop.y,
            l[3] - n[i] * slope_pop.z,
        ];
        for a in 0..4 {
            for b in 0..4 {
                small[(a, b)] += r[a] * l_row[b];
            }
        }
    }
    let small = DMatrix::from_iterator(4, 4, small.iter().copied());
    let top = eigen::dense_dominant_eigenvalue(&small)?;
    Ok(shift + top.max(0.0))
}

/// Restriction of `J` to the tangent space `{v : 1ᵀv = 0}` of the simplex,
/// expressed in an orthonormal basis of that space.
///
/// For any `J` produced by [`jacobian`] at a point with `1ᵀn = 1`, the
/// tangent space is invariant and the eigenvalue `-(1ᵀ f)` belonging to the
/// left eigenvector `1ᵀ` is removed.
pub fn simplex_tangent_block(jac: &DMatrix<f64>) -> DMatrix<f64> {
    let k = jac.nrows();
    let mut basis = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        basis[(i, 0)] = 1.0;
    }
    for j in 1..k {
        basis[(j - 1, j)] = 1.0;
    }
    let q = basis.qr().q();
    let tangent = q.columns(1, k - 1).into_owned();
    tangent.transpose() * jac * tangent
}
