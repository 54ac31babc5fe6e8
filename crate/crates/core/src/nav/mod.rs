//! Planar agent kinematics, scenario description and the closed control loop.

mod bench;
mod controller;
mod run;
mod scenario;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::neural::DirectionField;

pub use bench::{bench_coarse_step_time, bench_step_time, StepTiming, MIN_BENCH_REPEATS};
pub use controller::{
    CoarseNd, Command, Controller, ControllerFactory, ControllerRegistry, PotentialField, VisionNd,
    COARSE_ND, PF, VISION_ND,
};
pub use run::{run_scenario, run_with_controller, run_with_noise, StepRecord, TrajectoryLog};
pub use scenario::{CameraSpec, NeuralSpec, ScenarioConfig, TargetSpec, CONFIG_SCHEMA_VERSION};

/// Speeds below this are treated as "not moving" for heading updates and
/// potential-field directions.
pub const MIN_SPEED: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentState {
    pub position: Vector2<f64>,
    /// Unit vector in the plane.
    pub heading: Vector2<f64>,
    pub time: f64,
}

impl AgentState {
    pub fn new(position: Vector2<f64>, heading: Vector2<f64>) -> Result<Self> {
        let heading = heading
            .try_normalize(1e-12)
            .ok_or_else(|| invalid("start_heading", "must be nonzero"))?;
        Ok(Self {
            position,
            heading,
            time: 0.0,
        })
    }

    pub fn position3(&self) -> Vector3<f64> {
        Vector3::new(self.position.x, self.position.y, 0.0)
    }

    pub fn heading3(&self) -> Vector3<f64> {
        Vector3::new(self.heading.x, self.heading.y, 0.0)
    }

    pub fn heading_angle(&self) -> f64 {
        self.heading.y.atan2(self.heading.x)
    }
}

/// Advances by `v dt` plus the supplied position noise, realigns the heading
/// with `v` and advances the clock.
pub fn step_agent_with_noise(
    state: &AgentState,
    v: &Vector2<f64>,
    dt: f64,
    noise: Vector2<f64>,
) -> Result<AgentState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt_motion", format!("must be positive, got {dt}")));
    }
    let speed = v.norm();
    Ok(AgentState {
        position: state.position + v * dt + noise,
        heading: if speed > MIN_SPEED {
            v / speed
        } else {
            state.heading
        },
        time: state.time + dt,
    })
}

/// [`step_agent_with_noise`] with i.i.d. `N(0, sigma²)` noise per coordinate.
pub fn step_agent<R: Rng + ?Sized>(
    state: &AgentState,
    v: &Vector2<f64>,
    dt: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<AgentState> {
    let normal =
        Normal::new(0.0, sigma).map_err(|e| invalid("sigma_z", format!("{e} (got {sigma})")))?;
    let noise = Vector2::new(normal.sample(rng), normal.sample(rng));
    step_agent_with_noise(state, v, dt, noise)
}

/// Unit bearings from `position` to each target, as planar 3-vectors.
pub fn relative_directions(
    position: &Vector2<f64>,
    targets: &[Vector2<f64>],
) -> Result<DirectionField> {
    let cols = targets
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let d = g - position;
            let norm = d.norm();
            if norm == 0.0 {
                Err(Error::CoincidentTarget { index: i })
            } else {
                Ok(Vector3::new(d.x / norm, d.y / norm, 0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    DirectionField::new(cols)
}

/// Attractive potential-field command: `Σ (g_i - p)` rescaled to speed `v0`.
pub fn pf_velocity(position: &Vector2<f64>, targets: &[Vector2<f64>], v0: f64) -> Vector2<f64> {
    let force = targets
        .iter()
        .fold(Vector2::zeros(), |acc, g| acc + (g - position));
    let norm = force.norm();
    if norm < MIN_SPEED {
        Vector2::zeros()
    } else {
        force * (v0 / norm)
    }
}
