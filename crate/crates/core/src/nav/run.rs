use std::io::Write;
use std::time::Instant;

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{step_agent_with_noise, AgentState, Controller, ControllerRegistry, ScenarioConfig};
use crate::error::{invalid, Result};
use crate::io::fmt_f64;

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time after the motion step.
    pub time: f64,
    pub position: Vector2<f64>,
    pub heading: Vector2<f64>,
    /// Velocity commanded during the step.
    pub velocity: Vector2<f64>,
    pub lambda: Option<f64>,
    pub summary: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub mode: String,
    pub seed: u64,
    pub summary_columns: Vec<String>,
    pub records: Vec<StepRecord>,
    /// Index of the captured target, `None` when `max_steps` ran out.
    pub reached: Option<usize>,
    pub steps: usize,
    /// Excluded from equality-sensitive outputs such as the CSV.
    pub wall_time_s: f64,
}

impl TrajectoryLog {
    /// `(time, Re λ₁)` for every step that logged an eigenvalue.
    pub fn lambda_series(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.lambda.map(|l| (r.time, l)))
            .collect()
    }

    pub fn final_position(&self) -> Option<Vector2<f64>> {
        self.records.last().map(|r| r.position)
    }

    pub fn csv_header(&self) -> String {
        let mut cols: Vec<String> = [
            "step",
            "time",
            "x",
            "y",
            "heading_x",
            "heading_y",
            "vx",
            "vy",
            "lambda",
        ]
        .map(String::from)
        .to_vec();
        cols.extend(self.summary_columns.iter().cloned());
        cols.join(",")
    }

    /// One row per motion step; an absent eigenvalue is an empty field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for r in &self.records {
            let mut fields = vec![
                r.step.to_string(),
                fmt_f64(r.time),
                fmt_f64(r.position.x),
                fmt_f64(r.position.y),
                fmt_f64(r.heading.x),
                fmt_f64(r.heading.y),
                fmt_f64(r.velocity.x),
                fmt_f64(r.velocity.y),
                r.lambda.map(fmt_f64).unwrap_or_default(),
            ];
            fields.extend(r.summary.iter().map(|&x| fmt_f64(x)));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

fn captured(position: &Vector2<f64>, targets: &[Vector2<f64>], eps: f64) -> Option<usize> {
    targets
        .iter()
        .enumerate()
        .map(|(i, g)| (i, (g - position).norm()))
        .filter(|(_, d)| *d <= eps)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// Builds `mode` from the built-in registry and runs it with the config's seed.
pub fn run_scenario(config: &ScenarioConfig, mode: &str) -> Result<TrajectoryLog> {
    let mut controller = ControllerRegistry::with_builtin().build(mode, config)?;
    run_with_controller(config, controller.as_mut())
}

/// Position noise `N(0, sigma_z²)` per coordinate from a ChaCha8 stream
/// seeded with `config.seed`, x drawn before y.
pub fn run_with_controller(
    config: &ScenarioConfig,
    controller: &mut dyn Controller,
) -> Result<TrajectoryLog> {
    let normal = Normal::new(0.0, config.sigma_z).map_err(|e| invalid("sigma_z", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut noise = || Vector2::new(normal.sample(&mut rng), normal.sample(&mut rng));
    run_with_noise(config, controller, &mut noise)
}

/// The closed loop with an explicit noise source (one draw per motion step).
pub fn run_with_noise(
    config: &ScenarioConfig,
    controller: &mut dyn Controller,
    noise: &mut dyn FnMut() -> Vector2<f64>,
) -> Result<TrajectoryLog> {
    let started = Instant::now();
    let targets = config.target_positions();
    let mut agent = AgentState::new(config.start.into(), config.start_heading.into())?;
    let mut records = Vec::new();
    let mut reached = captured(&agent.position, &targets, config.eps);
    let mut steps = 0;
    while reached.is_none() && steps < config.max_steps {
        let cmd = controller.command(&agent)?;
        agent = step_agent_with_noise(&agent, &cmd.velocity, config.dt_motion, noise())?;
        steps += 1;
        records.push(StepRecord {
            step: steps,
            time: agent.time,
            position: agent.position,
            heading: agent.heading,
            velocity: cmd.velocity,
            lambda: cmd.lambda,
            summary: cmd.summary,
        });
        reached = captured(&agent.position, &targets, config.eps);
    }
    Ok(TrajectoryLog {
        mode: controller.name().to_owned(),
        seed: config.seed,
        summary_columns: controller.summary_columns(),
        records,
        reached,
        steps,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nav::{CoarseNd, COARSE_ND, PF};
    use std::path::Path;

    fn two_goal() -> ScenarioConfig {
        ScenarioConfig::from_toml_str(
            r#"
schema_version = 1
[neural]
a = 2.0
alpha = 6.0
[[targets]]
center = [8.0, 4.0]
[[targets]]
center = [8.0, -4.0]
"#,
            Path::new("inline"),
        )
        .unwrap()
    }

    #[test]
    fn seeded_runs_are_identical() {
        let cfg = two_goal().with_seed(11);
        let a = run_scenario(&cfg, COARSE_ND).unwrap();
        let b = run_scenario(&cfg, COARSE_ND).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.reached, b.reached);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn capture_is_consistent_and_times_increase() {
        let cfg = two_goal().with_seed(2);
        let log = run_scenario(&cfg, COARSE_ND).unwrap();
        let i = log.reached.expect("coarse-nd captures");
        let g = cfg.target_positions()[i];
        assert!((log.final_position().unwrap() - g).norm() <= cfg.eps);
        assert!(log.records.windows(2).all(|w| w[1].time > w[0].time));
        assert_eq!(log.steps, log.records.len());
        assert!(log
            .records
            .iter()
            .all(|r| r.velocity.norm() <= cfg.v0 + 1e-12));
    }

    #[test]
    fn exhaustion_reports_no_capture() {
        let mut cfg = two_goal();
        cfg.max_steps = 30;
        let log = run_scenario(&cfg, PF).unwrap();
        assert_eq!(log.reached, None);
        assert_eq!(log.steps, 30);
        assert!(log.lambda_series().is_empty());
    }

    #[test]
    fn mirrored_noise_mirrors_the_trajectory() {
        let cfg = two_goal().with_seed(5);
        let normal = Normal::new(0.0, cfg.sigma_z).unwrap();
        let draw = |flip: bool| {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            move || {
                let (x, y) = (normal.sample(&mut rng), normal.sample(&mut rng));
                Vector2::new(x, if flip { -y } else { y })
            }
        };
        let mut c = CoarseNd::new(&cfg).unwrap();
        let a = run_with_noise(&cfg, &mut c, &mut draw(false)).unwrap();
        let mut c = CoarseNd::new(&cfg).unwrap();
        let b = run_with_noise(&cfg, &mut c, &mut draw(true)).unwrap();
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.reached.map(|i| 1 - i), b.reached);
        for (p, q) in a.records.iter().zip(&b.records) {
            assert_eq!(p.position.x, q.position.x);
            assert_eq!(p.position.y, -q.position.y);
            assert!((p.lambda.unwrap() - q.lambda.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_has_header_and_lf() {
        let mut cfg = two_goal();
        cfg.max_steps = 3;
        let log = run_scenario(&cfg, COARSE_ND).unwrap();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,time,x,y,heading_x,heading_y,vx,vy,lambda,n0,n1\n"));
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
    }
}
