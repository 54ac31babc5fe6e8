use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::SigmoidParams;
use crate::vision::{CameraModel, SphereTarget};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub center: [f64; 2],
    /// Rendering radius; capture uses `eps` instead.
    #[serde(default = "defaults::radius")]
    pub radius: f64,
    /// Cluster weight in the coarse model.
    #[serde(default = "defaults::one")]
    pub cluster_size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuralSpec {
    pub a: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub rows: usize,
    pub cols: usize,
    pub fov_h: f64,
    pub fov_v: f64,
    pub neural_rows: usize,
    pub neural_cols: usize,
    #[serde(default = "defaults::one")]
    pub evidence_gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub targets: Vec<TargetSpec>,
    #[serde(default)]
    pub start: [f64; 2],
    #[serde(default = "defaults::heading")]
    pub start_heading: [f64; 2],
    #[serde(default = "defaults::one")]
    pub v0: f64,
    #[serde(default = "defaults::eps")]
    pub eps: f64,
    #[serde(default = "defaults::sigma_z")]
    pub sigma_z: f64,
    #[serde(default = "defaults::dt_motion")]
    pub dt_motion: f64,
    #[serde(default = "defaults::neural_substeps")]
    pub neural_substeps: usize,
    #[serde(default = "defaults::neural_dt")]
    pub neural_dt: f64,
    #[serde(default = "defaults::max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub seed: u64,
    pub neural: NeuralSpec,
    #[serde(default)]
    pub camera: Option<CameraSpec>,
}

mod defaults {
    pub fn one() -> f64 {
        1.0
    }
    pub fn radius() -> f64 {
        0.5
    }
    pub fn heading() -> [f64; 2] {
        [1.0, 0.0]
    }
    pub fn eps() -> f64 {
        0.5
    }
    pub fn sigma_z() -> f64 {
        0.01
    }
    pub fn dt_motion() -> f64 {
        0.05
    }
    pub fn neural_substeps() -> usize {
        3
    }
    pub fn neural_dt() -> f64 {
        crate::neural::DEFAULT_DT
    }
    pub fn max_steps() -> usize {
        5000
    }
}

fn positive(name: &str, x: f64) -> std::result::Result<(), String> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(format!("`{name}` must be positive, got {x}"))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.to_path_buf(),
            reason: e.to_string(),
        })?;
        config.validate().map_err(|reason| Error::Config {
            path: origin.to_path_buf(),
            reason,
        })?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.targets.is_empty() {
            return Err("need at least one [[targets]] entry".into());
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.center.iter().any(|c| !c.is_finite()) {
                return Err(format!("targets[{i}].center must be finite"));
            }
            positive(&format!("targets[{i}].radius"), t.radius)?;
            positive(&format!("targets[{i}].cluster_size"), t.cluster_size)?;
        }
        positive("v0", self.v0)?;
        positive("eps", self.eps)?;
        positive("dt_motion", self.dt_motion)?;
        if !(self.sigma_z.is_finite() && self.sigma_z >= 0.0) {
            return Err(format!(
                "`sigma_z` must be nonnegative, got {}",
                self.sigma_z
            ));
        }
        if self.neural_substeps == 0 {
            return Err("`neural_substeps` must be at least 1".into());
        }
        if !(self.neural_dt > 0.0 && self.neural_dt <= 1.0) {
            return Err(format!(
                "`neural_dt` must lie in (0, 1], got {}",
                self.neural_dt
            ));
        }
        if self.max_steps == 0 {
            return Err("`max_steps` must be at least 1".into());
        }
        if self
            .start
            .iter()
            .chain(&self.start_heading)
            .any(|c| !c.is_finite())
            || Vector2::from(self.start_heading).norm() < 1e-12
        {
            return Err("`start` must be finite and `start_heading` nonzero".into());
        }
        SigmoidParams::new(self.neural.a, self.neural.alpha)
            .map_err(|e| format!("[neural]: {e}"))?;
        if let Some(cam) = &self.camera {
            if cam.neural_rows == 0 || cam.neural_cols == 0 {
                return Err("[camera]: neural grid must be nonempty".into());
            }
            if cam.neural_rows > cam.rows || cam.neural_cols > cam.cols {
                return Err("[camera]: neural grid cannot exceed the native resolution".into());
            }
            if cam.neural_rows * cam.neural_cols < 2 {
                return Err("[camera]: need at least two neurons".into());
            }
            positive("camera.evidence_gain", cam.evidence_gain)?;
            self.camera_model().map_err(|e| format!("[camera]: {e}"))?;
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn sigmoid(&self) -> Result<SigmoidParams> {
        SigmoidParams::new(self.neural.a, self.neural.alpha)
    }

    pub fn target_positions(&self) -> Vec<Vector2<f64>> {
        self.targets
            .iter()
            .map(|t| Vector2::from(t.center))
            .collect()
    }

    pub fn sphere_targets(&self) -> Result<Vec<SphereTarget>> {
        self.targets
            .iter()
            .map(|t| SphereTarget::new(Vector3::new(t.center[0], t.center[1], 0.0), t.radius))
            .collect()
    }

    /// Native camera at the start pose, or `None` in benchmark mode.
    pub fn camera_model(&self) -> Result<Option<CameraModel>> {
        let Some(cam) = &self.camera else {
            return Ok(None);
        };
        let h = Vector2::from(self.start_heading).normalize();
        CameraModel::new(
            cam.rows,
            cam.cols,
            cam.fov_h,
            cam.fov_v,
            Vector3::new(self.start[0], self.start[1], 0.0),
            Vector3::new(h.x, h.y, 0.0),
        )
        .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[neural]
a = 2.0
alpha = 6.0
[[targets]]
center = [8.0, 4.0]
[[targets]]
center = [8.0, -4.0]
"#;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml_str(text, Path::new("inline.toml"))
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.eps, 0.5);
        assert_eq!(c.sigma_z, 0.01);
        assert_eq!(c.dt_motion, 0.05);
        assert_eq!(c.neural_substeps, 3);
        assert_eq!(c.max_steps, 5000);
        assert_eq!(c.v0, 1.0);
        assert_eq!(c.start_heading, [1.0, 0.0]);
        assert!(c.camera.is_none());
        assert_eq!(c.targets[1].cluster_size, 1.0);
    }

    #[test]
    fn validation_messages_name_the_field() {
        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 1\neps = -1.0");
        let err = parse(&bad).unwrap_err().to_string();
        assert!(err.contains("eps") && err.contains("inline.toml"), "{err}");

        let bad = MINIMAL.replace(
            "schema_version = 1",
            "schema_version = 1\nneural_substeps = 0",
        );
        assert!(parse(&bad)
            .unwrap_err()
            .to_string()
            .contains("neural_substeps"));

        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 1\nv0 = 0.0");
        assert!(parse(&bad).unwrap_err().to_string().contains("v0"));

        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 1\nspeed = 2.0");
        assert!(parse(&bad).unwrap_err().to_string().contains("speed"));

        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn camera_section_is_checked() {
        let with_cam = format!(
            "{MINIMAL}\n[camera]\nrows = 16\ncols = 16\nfov_h = 120.0\nfov_v = 40.0\nneural_rows = 32\nneural_cols = 8\n"
        );
        assert!(parse(&with_cam).is_err());
        let ok = with_cam.replace("neural_rows = 32", "neural_rows = 8");
        let c = parse(&ok).unwrap();
        assert_eq!(c.camera_model().unwrap().unwrap().rows(), 16);
    }

    #[test]
    fn missing_file_names_path() {
        let err = ScenarioConfig::from_path("/nonexistent/where.toml").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/where.toml"));
    }
}
