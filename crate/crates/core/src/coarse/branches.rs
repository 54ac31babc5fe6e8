use std::io::Write;

use serde::Serialize;

use super::scalar::{
    mu_to_angle, normal_form_coefficients, scalar_rhs, scalar_rhs_dx, solve_mu_star, NormalForm,
    ScalarParams,
};
use crate::error::{invalid, Error, Result};
use crate::io::fmt_f64;
use crate::neural::SigmoidParams;

pub const ROOT_GRID_POINTS: usize = 2048;
pub const ROOT_TOL: f64 = 1e-10;
pub const ROOT_MERGE_TOL: f64 = 1e-6;
/// Largest jump in `x` between consecutive sweep points on one branch.
pub const BRANCH_JUMP_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub x: f64,
    pub stable: bool,
    /// Linearization rate `∂f/∂x` at the root.
    pub lambda: f64,
    /// Set when nearby roots (a numerical double root) were merged into this one.
    pub merged: bool,
}

/// All roots of [`scalar_rhs`] on `[-1, 1]`: sign-change scan on a uniform
/// grid, bisection refinement, then deduplication.
pub fn equilibria(params: &ScalarParams) -> Vec<Equilibrium> {
    let f = |x: f64| scalar_rhs(x, params);
    let last = ROOT_GRID_POINTS - 1;
    let grid: Vec<f64> = (0..ROOT_GRID_POINTS)
        .map(|i| -1.0 + 2.0 * i as f64 / last as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();

    let mut roots = Vec::new();
    for i in 0..last {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(refine(x0, x1, f0, &f));
        }
    }
    if values[last] == 0.0 {
        roots.push(grid[last]);
    }

    let mut out: Vec<Equilibrium> = Vec::with_capacity(roots.len());
    for x in roots {
        if let Some(prev) = out.last_mut() {
            if (x - prev.x).abs() < ROOT_MERGE_TOL {
                prev.merged = true;
                continue;
            }
        }
        let lambda = scalar_rhs_dx(x, params);
        out.push(Equilibrium {
            x,
            stable: lambda < 0.0,
            lambda,
            merged: false,
        });
    }
    out
}

fn refine(mut lo: f64, mut hi: f64, mut f_lo: f64, f: &impl Fn(f64) -> f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchPoint {
    pub mu: f64,
    pub x_star: f64,
    pub stable: bool,
    pub lambda: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BifurcationBranch {
    pub points: Vec<BranchPoint>,
}

impl BifurcationBranch {
    pub fn first(&self) -> &BranchPoint {
        &self.points[0]
    }

    pub fn last(&self) -> &BranchPoint {
        &self.points[self.points.len() - 1]
    }

    pub fn mu_range(&self) -> (f64, f64) {
        (self.first().mu, self.last().mu)
    }
}

/// Equilibria on a uniform `mu` grid, linked into branches by nearest-`x`
/// continuation. A branch ends when no root lies within
/// [`BRANCH_JUMP_THRESHOLD`] of its last point on the next grid value (fold
/// points close branches); unmatched roots open new ones.
pub fn sweep_branches(
    mu_range: (f64, f64),
    n_points: usize,
    cbar: f64,
    sigmoid: &SigmoidParams,
) -> Result<Vec<BifurcationBranch>> {
    let (mu_lo, mu_hi) = mu_range;
    if n_points < 2 {
        return Err(invalid(
            "n_points",
            format!("need at least 2, got {n_points}"),
        ));
    }
    if !(0.0..=2.0).contains(&mu_lo) || !(0.0..=2.0).contains(&mu_hi) || mu_lo >= mu_hi {
        return Err(invalid(
            "mu_range",
            format!("need 0 <= mu_min < mu_max <= 2, got [{mu_lo}, {mu_hi}]"),
        ));
    }
    let base = ScalarParams::new(mu_lo, cbar, *sigmoid)?;

    let mut done: Vec<BifurcationBranch> = Vec::new();
    let mut open: Vec<BifurcationBranch> = Vec::new();
    for i in 0..n_points {
        let mu = mu_lo + (mu_hi - mu_lo) * i as f64 / (n_points - 1) as f64;
        let roots = equilibria(&base.with_mu(mu)?);

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (b, branch) in open.iter().enumerate() {
            for (r, root) in roots.iter().enumerate() {
                let gap = (branch.last().x_star - root.x).abs();
                if gap <= BRANCH_JUMP_THRESHOLD {
                    pairs.push((gap, b, r));
                }
            }
        }
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut branch_taken = vec![None; open.len()];
        let mut root_taken = vec![false; roots.len()];
        for (_, b, r) in pairs {
            if branch_taken[b].is_none() && !root_taken[r] {
                branch_taken[b] = Some(r);
                root_taken[r] = true;
            }
        }

        let mut next_open = Vec::with_capacity(roots.len());
        for (branch, taken) in open.into_iter().zip(branch_taken) {
            match taken {
                Some(r) => {
                    let mut branch = branch;
                    branch.points.push(point(mu, &roots[r]));
                    next_open.push(branch);
                }
                None => done.push(branch),
            }
        }
        for (r, root) in roots.iter().enumerate() {
            if !root_taken[r] {
                next_open.push(BifurcationBranch {
                    points: vec![point(mu, root)],
                });
            }
        }
        open = next_open;
    }
    done.extend(open);
    done.sort_by(|p, q| {
        p.first()
            .mu
            .total_cmp(&q.first().mu)
            .then(p.first().x_star.total_cmp(&q.first().x_star))
    });
    Ok(done)
}

fn point(mu: f64, eq: &Equilibrium) -> BranchPoint {
    BranchPoint {
        mu,
        x_star: eq.x,
        stable: eq.stable,
        lambda: eq.lambda,
    }
}

/// Version of the [`BifurcationSummary`] JSON layout.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationSummary {
    pub schema_version: u32,
    pub a: f64,
    pub alpha: f64,
    pub cbar: f64,
    pub mu_star: Option<f64>,
    pub theta_star_deg: Option<f64>,
    pub normal_form: Option<NormalForm>,
    pub supercritical: Option<bool>,
    pub branch_count: usize,
}

/// Branch sweep together with the symmetric critical point and its normal form.
pub fn bifurcation_analysis(
    mu_range: (f64, f64),
    n_points: usize,
    cbar: f64,
    sigmoid: &SigmoidParams,
) -> Result<(Vec<BifurcationBranch>, BifurcationSummary)> {
    let branches = sweep_branches(mu_range, n_points, cbar, sigmoid)?;
    let mu_star = solve_mu_star(sigmoid.alpha());
    let theta_star_deg = mu_star.map(mu_to_angle).transpose()?;
    let normal_form = match mu_star {
        Some(mu) => match normal_form_coefficients(mu, sigmoid) {
            Ok(nf) => Some(nf),
            Err(Error::DegenerateNormalForm { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let summary = BifurcationSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        a: sigmoid.a(),
        alpha: sigmoid.alpha(),
        cbar,
        mu_star,
        theta_star_deg,
        supercritical: normal_form.map(|nf| nf.supercritical),
        normal_form,
        branch_count: branches.len(),
    };
    Ok((branches, summary))
}

/// `mu,x_star,stable,lambda,branch_id` with one row per branch point.
pub fn write_branches_csv<W: Write>(branches: &[BifurcationBranch], mut out: W) -> Result<()> {
    writeln!(out, "mu,x_star,stable,lambda,branch_id")?;
    for (id, branch) in branches.iter().enumerate() {
        for p in &branch.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(p.mu),
                fmt_f64(p.x_star),
                p.stable,
                fmt_f64(p.lambda),
                id
            )?;
        }
    }
    Ok(())
}
