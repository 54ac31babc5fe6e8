//! Two-option reduction in the shifted coordinate `x = 2 n̄₁ - 1`.
//!
//! With `μ = 1 - cos θ₁₂`, `α̃ = α/4` and normalized asymmetry `C̄`:
//!
//! ```text
//! dx/dt = -a x + (a/2)(1 - x)(1 + C̄) tanh(α̃(μx + 2 - μ))
//!              + (a/2)(1 + x)(1 - C̄) tanh(α̃(μx - 2 + μ)) + a C̄
//! ```

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::neural::SigmoidParams;

const BISECTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarParams {
    mu: f64,
    cbar: f64,
    sigmoid: SigmoidParams,
}

impl ScalarParams {
    pub fn new(mu: f64, cbar: f64, sigmoid: SigmoidParams) -> Result<Self> {
        if !(0.0..=2.0).contains(&mu) {
            return Err(invalid("mu", format!("must lie in [0, 2], got {mu}")));
        }
        if !(-1.0..=1.0).contains(&cbar) {
            return Err(invalid("cbar", format!("must lie in [-1, 1], got {cbar}")));
        }
        Ok(Self { mu, cbar, sigmoid })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn cbar(&self) -> f64 {
        self.cbar
    }

    pub fn sigmoid(&self) -> &SigmoidParams {
        &self.sigmoid
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.cbar, self.sigmoid)
    }
}

pub fn scalar_rhs(x: f64, params: &ScalarParams) -> f64 {
    let (a, at, mu, cb) = unpack(params);
    let up = (at * (mu * x + 2.0 - mu)).tanh();
    let down = (at * (mu * x - 2.0 + mu)).tanh();
    -a * x
        + 0.5 * a * (1.0 - x) * (1.0 + cb) * up
        + 0.5 * a * (1.0 + x) * (1.0 - cb) * down
        + a * cb
}

/// Analytic `∂/∂x` of [`scalar_rhs`]; the linearization rate at an equilibrium.
pub fn scalar_rhs_dx(x: f64, params: &ScalarParams) -> f64 {
    let (a, at, mu, cb) = unpack(params);
    let up = (at * (mu * x + 2.0 - mu)).tanh();
    let down = (at * (mu * x - 2.0 + mu)).tanh();
    let gain = at * mu;
    -a - 0.5 * a * (1.0 + cb) * up
        + 0.5 * a * (1.0 - x) * (1.0 + cb) * gain * (1.0 - up * up)
        + 0.5 * a * (1.0 - cb) * down
        + 0.5 * a * (1.0 + x) * (1.0 - cb) * gain * (1.0 - down * down)
}

fn unpack(params: &ScalarParams) -> (f64, f64, f64, f64) {
    (
        params.sigmoid.a(),
        params.sigmoid.alpha() / 4.0,
        params.mu,
        params.cbar,
    )
}

/// `h(μ, α̃) = α̃ μ tanh(α̃(2 - μ)) - α̃ μ + 1`. The compromise `x = 0` is
/// stable where `h > 0`; `h` does not involve `a`.
pub fn bifurcation_condition(mu: f64, alpha: f64) -> f64 {
    let at = alpha / 4.0;
    at * mu * (at * (2.0 - mu)).tanh() - at * mu + 1.0
}

fn bisect(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
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

/// Symmetric bifurcation point `μ*` on `[0, 2]`, or `None` when `α < 2`.
pub fn solve_mu_star(alpha: f64) -> Option<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return None;
    }
    let h = |mu: f64| bifurcation_condition(mu, alpha);
    let at_two = h(2.0);
    if at_two > 0.0 {
        return None;
    }
    if at_two == 0.0 {
        return Some(2.0);
    }
    Some(bisect(0.0, 2.0, BISECTION_TOL, h))
}

/// Smallest attainable `μ*` over `α` and the slope attaining it.
///
/// Stationarity of `μ*(α̃)` gives `α̃ = 1/(μ(2 - μ))`; substituted into
/// `h = 0` this leaves `tanh(1/μ) + 1 - μ = 0`, which has a single root in
/// `[1, 2]`.
pub fn min_mu_star() -> (f64, f64) {
    let mu_min = bisect(1.0, 2.0, BISECTION_TOL, |mu| (1.0 / mu).tanh() + 1.0 - mu);
    let alpha_min = 4.0 / (mu_min * (2.0 - mu_min));
    (mu_min, alpha_min)
}

/// Perceived separation `arccos(1 - μ)` in degrees.
pub fn mu_to_angle(mu: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&mu) {
        return Err(invalid("mu", format!("must lie in [0, 2], got {mu}")));
    }
    Ok((1.0 - mu).acos().to_degrees())
}

/// Low-order unfolding of the pitchfork at `(x, μ, C̄) = (0, μ*, 0)`:
/// `f ≈ β₁ (μ - μ*) x + β₂ x³ + β₃ C̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalForm {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub supercritical: bool,
}

pub fn normal_form_coefficients(mu_star: f64, sigmoid: &SigmoidParams) -> Result<NormalForm> {
    let alpha = sigmoid.alpha();
    let residual = bifurcation_condition(mu_star, alpha);
    if !(0.0..=2.0).contains(&mu_star) || residual.abs() > 1e-6 {
        return Err(invalid(
            "mu_star",
            format!("{mu_star} is not a bifurcation point for alpha = {alpha} (h = {residual})"),
        ));
    }
    let a = sigmoid.a();
    let at = alpha / 4.0;
    let t = (at * (2.0 - mu_star)).tanh();
    let sech2 = 1.0 - t * t;
    let beta1 = 2.0 * a * at * sech2 * (1.0 + at * mu_star * t);
    let cubic_factor = 3.0 * t + at * mu_star * (3.0 * t * t - 1.0);
    let f_xxx = 2.0 * a * at * at * mu_star * mu_star * sech2 * cubic_factor;
    if cubic_factor.abs() < 1e-12 {
        return Err(Error::DegenerateNormalForm { mu_star });
    }
    let beta3 = a * (t + 1.0);
    Ok(NormalForm {
        beta1,
        beta2: f_xxx / 6.0,
        beta3,
        supercritical: f_xxx < 0.0,
    })
}
