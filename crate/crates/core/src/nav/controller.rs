use std::collections::BTreeMap;

use nalgebra::{Vector2, Vector3};

use super::{pf_velocity, relative_directions, AgentState, ScenarioConfig};
use crate::coarse::{coarse_dominant_eigenvalue, coarse_step, CoarseConfig};
use crate::error::{invalid, Error, Result};
use crate::neural::{
    low_rank_dominant_eigenvalue, step, threshold, velocity, DirectionField, EvidenceField,
    NeuralState, SigmoidParams,
};
use crate::vision::{downsample, render_evidence, sample_coordinate, CameraModel, SphereTarget};

pub const VISION_ND: &str = "vision-nd";
pub const COARSE_ND: &str = "coarse-nd";
pub const PF: &str = "pf";

/// One motion-step decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    /// Planar world-frame velocity.
    pub velocity: Vector2<f64>,
    /// `Re(λ₁)` of the neural Jacobian after this step's update.
    pub lambda: Option<f64>,
    /// Controller-specific values, named by [`Controller::summary_columns`].
    pub summary: Vec<f64>,
}

pub trait Controller: Send {
    fn name(&self) -> &'static str;

    fn summary_columns(&self) -> Vec<String>;

    fn command(&mut self, agent: &AgentState) -> Result<Command>;
}

pub type ControllerFactory = fn(&ScenarioConfig) -> Result<Box<dyn Controller>>;

/// Controllers looked up by name at run time.
#[derive(Clone, Debug, Default)]
pub struct ControllerRegistry {
    factories: BTreeMap<String, ControllerFactory>,
}

impl ControllerRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `vision-nd`, `coarse-nd` and `pf`.
    pub fn with_builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(VISION_ND, |c| Ok(Box::new(VisionNd::new(c)?)));
        reg.register(COARSE_ND, |c| Ok(Box::new(CoarseNd::new(c)?)));
        reg.register(PF, |c| Ok(Box::new(PotentialField::new(c))));
        reg
    }

    /// Adds or replaces the factory under `name`.
    pub fn register(&mut self, name: &str, factory: ControllerFactory) {
        self.factories.insert(name.to_owned(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, config: &ScenarioConfig) -> Result<Box<dyn Controller>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownController(name.to_owned()))?;
        factory(config)
    }
}

/// Camera evidence through the full neural population.
pub struct VisionNd {
    camera: CameraModel,
    targets: Vec<SphereTarget>,
    rays: DirectionField,
    grid: (usize, usize),
    gain: f64,
    params: SigmoidParams,
    state: NeuralState,
    substeps: usize,
    dt: f64,
    v0: f64,
}

impl VisionNd {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let spec = config
            .camera
            .ok_or_else(|| invalid("camera", "vision-nd needs a [camera] section"))?;
        let camera = config.camera_model()?.expect("camera section present");
        let (kh, kw) = (spec.neural_rows, spec.neural_cols);
        let mut rays = Vec::with_capacity(kh * kw);
        for r in 0..kh {
            let row = sample_coordinate(r, camera.rows(), kh);
            for c in 0..kw {
                rays.push(camera.body_ray(row, sample_coordinate(c, camera.cols(), kw)));
            }
        }
        Ok(Self {
            targets: config.sphere_targets()?,
            rays: DirectionField::new(rays)?,
            grid: (kh, kw),
            gain: spec.evidence_gain,
            params: config.sigmoid()?,
            state: NeuralState::uniform(kh * kw)?,
            substeps: config.neural_substeps,
            dt: config.neural_dt,
            v0: config.v0,
            camera,
        })
    }

    /// Body-frame preferred directions of the neurons, row-major.
    pub fn rays(&self) -> &DirectionField {
        &self.rays
    }

    pub fn state(&self) -> &NeuralState {
        &self.state
    }

    /// Index of the neuron whose activity sets the threshold.
    pub fn center_index(&self) -> usize {
        let (kh, kw) = self.grid;
        (kh / 2) * kw + kw / 2
    }

    /// Activity of the centre neuron. When the centre itself sees a target,
    /// the most active evidence-free neuron stands in as the background
    /// level instead.
    pub fn threshold_level(&self, n: &[f64], u: &EvidenceField) -> f64 {
        let centre = self.center_index();
        if u.as_slice()[centre] == 0.0 {
            return n[centre];
        }
        n.iter()
            .zip(u.as_slice())
            .filter(|(_, &ui)| ui == 0.0)
            .map(|(&ni, _)| ni)
            .reduce(f64::max)
            .unwrap_or(0.0)
    }

    pub fn evidence(&self, agent: &AgentState) -> Result<EvidenceField> {
        let cam = self.camera.with_pose(agent.position3(), agent.heading3())?;
        let native = render_evidence(&cam, &self.targets)?;
        let coarse = downsample(&native, self.grid.0, self.grid.1)?;
        EvidenceField::new(coarse.as_slice().iter().map(|x| x * self.gain).collect())
    }
}

impl Controller for VisionNd {
    fn name(&self) -> &'static str {
        VISION_ND
    }

    fn summary_columns(&self) -> Vec<String> {
        ["threshold", "n_max", "active", "evidence"]
            .map(String::from)
            .to_vec()
    }

    fn command(&mut self, agent: &AgentState) -> Result<Command> {
        let u = self.evidence(agent)?;
        for _ in 0..self.substeps {
            self.state = step(&self.state, &u, &self.rays, &self.params, self.dt)?;
        }
        let n = self.state.as_slice();
        let g = self.threshold_level(n, &u);
        let selected = threshold(n, g);
        let body = velocity(&selected, &self.rays, self.v0)?;
        let cam = self.camera.with_pose(agent.position3(), agent.heading3())?;
        let world = cam.to_world(&body);
        let lambda = low_rank_dominant_eigenvalue(n, &u, &self.rays, &self.params)?;
        let active = selected.iter().filter(|&&x| x > 0.0).count() as f64;
        let n_max = n.iter().copied().fold(0.0, f64::max);
        Ok(Command {
            velocity: Vector2::new(world.x, world.y),
            lambda: Some(lambda),
            summary: vec![g, n_max, active, u.as_slice().iter().sum()],
        })
    }
}

/// Target bearings from global positions through the coarse model, one
/// option per target.
pub struct CoarseNd {
    targets: Vec<Vector2<f64>>,
    sizes: Vec<f64>,
    params: SigmoidParams,
    state: NeuralState,
    substeps: usize,
    dt: f64,
    v0: f64,
}

impl CoarseNd {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let r = config.targets.len();
        if r < 2 {
            return Err(invalid("targets", "coarse-nd needs at least two targets"));
        }
        Ok(Self {
            targets: config.target_positions(),
            sizes: config.targets.iter().map(|t| t.cluster_size).collect(),
            params: config.sigmoid()?,
            state: NeuralState::uniform(r)?,
            substeps: config.neural_substeps,
            dt: config.neural_dt,
            v0: config.v0,
        })
    }

    pub fn state(&self) -> &NeuralState {
        &self.state
    }
}

impl Controller for CoarseNd {
    fn name(&self) -> &'static str {
        COARSE_ND
    }

    fn summary_columns(&self) -> Vec<String> {
        (0..self.targets.len()).map(|s| format!("n{s}")).collect()
    }

    fn command(&mut self, agent: &AgentState) -> Result<Command> {
        let dirs = relative_directions(&agent.position, &self.targets)?;
        let config = CoarseConfig::new(self.params, self.sizes.clone(), dirs)?;
        for _ in 0..self.substeps {
            self.state = coarse_step(&self.state, &config, self.dt)?;
        }
        let n = self.state.as_slice();
        let heading: Vector3<f64> = n
            .iter()
            .zip(config.directions().columns())
            .fold(Vector3::zeros(), |acc, (&w, p)| acc + p * w);
        let lambda = coarse_dominant_eigenvalue(n, &config)?;
        Ok(Command {
            velocity: Vector2::new(heading.x, heading.y) * self.v0,
            lambda: Some(lambda),
            summary: n.to_vec(),
        })
    }
}

/// Attraction toward all targets at once.
pub struct PotentialField {
    targets: Vec<Vector2<f64>>,
    v0: f64,
}

impl PotentialField {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            targets: config.target_positions(),
            v0: config.v0,
        }
    }
}

impl Controller for PotentialField {
    fn name(&self) -> &'static str {
        PF
    }

    fn summary_columns(&self) -> Vec<String> {
        Vec::new()
    }

    fn command(&mut self, agent: &AgentState) -> Result<Command> {
        Ok(Command {
            velocity: pf_velocity(&agent.position, &self.targets, self.v0),
            lambda: None,
            summary: Vec::new(),
        })
    }
}
