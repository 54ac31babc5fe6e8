use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{CameraModel, Grid};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereTarget {
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl SphereTarget {
    pub fn new(center: Vector3<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// Apparent half-angle `arctan(r / d)` and unit bearing seen from `eye`.
    pub fn apparent(&self, eye: &Vector3<f64>) -> Option<(f64, Vector3<f64>)> {
        let offset = self.center - eye;
        let dist = offset.norm();
        if dist == 0.0 {
            return None;
        }
        Some(((self.radius / dist).atan(), offset / dist))
    }
}

/// Binary evidence at native resolution: a pixel is `1` when its ray lies
/// within the apparent half-angle of any target. Targets are a union, with
/// no occlusion between them.
pub fn render_evidence(camera: &CameraModel, targets: &[SphereTarget]) -> Result<Grid> {
    let eye = camera.position();
    let cones = targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.apparent(eye)
                .map(|(gamma, dir)| (gamma.cos(), dir))
                .ok_or(Error::CoincidentTarget { index: i })
        })
        .collect::<Result<Vec<_>>>()?;
    let rays = camera.world_rays();
    let data = rays
        .iter()
        .map(|ray| {
            let hit = cones
                .iter()
                .any(|(cos_gamma, dir)| ray.dot(dir) >= *cos_gamma);
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Grid::new(camera.rows(), camera.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vision::pixel_rays;

    fn camera(h: usize, w: usize, fov: f64) -> CameraModel {
        CameraModel::new(h, w, fov, fov, Vector3::zeros(), Vector3::x()).unwrap()
    }

    fn brute_force_count(cam: &CameraModel, t: &SphereTarget) -> usize {
        let gamma = (t.radius / (t.center - cam.position()).norm()).atan();
        let dir = (t.center - cam.position()).normalize();
        pixel_rays(cam)
            .columns()
            .iter()
            .map(|r| cam.to_world(r))
            .filter(|r| r.dot(&dir).clamp(-1.0, 1.0).acos() <= gamma)
            .count()
    }

    #[test]
    fn on_axis_target_lights_centre() {
        let cam = camera(65, 65, 110.0);
        let t = SphereTarget::new(Vector3::new(10.0, 0.0, 0.0), 1.0).unwrap();
        let g = render_evidence(&cam, &[t]).unwrap();
        assert_eq!(g.get(32, 32), 1.0);
        let cam = camera(64, 64, 110.0);
        let g = render_evidence(&cam, &[t]).unwrap();
        assert_eq!(g.sum() as usize, brute_force_count(&cam, &t));
        assert!(g.sum() > 0.0);
    }

    #[test]
    fn target_behind_is_invisible() {
        let cam = camera(64, 64, 110.0);
        let t = SphereTarget::new(Vector3::new(-10.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!(render_evidence(&cam, &[t]).unwrap().sum(), 0.0);
    }

    #[test]
    fn coincident_target_rejected() {
        let cam = camera(4, 4, 90.0);
        let t = SphereTarget::new(Vector3::zeros(), 1.0).unwrap();
        assert!(matches!(
            render_evidence(&cam, &[t]),
            Err(Error::CoincidentTarget { index: 0 })
        ));
    }

    #[test]
    fn count_shrinks_with_distance() {
        let cam = camera(48, 48, 90.0);
        let mut last = usize::MAX;
        for d in [2.0, 3.0, 5.0, 8.0, 13.0, 21.0] {
            let t = SphereTarget::new(Vector3::new(d, 0.0, 0.0), 0.8).unwrap();
            let count = render_evidence(&cam, &[t]).unwrap().sum() as usize;
            assert!(count <= last);
            last = count;
        }
    }
}
