use nalgebra::Vector3;

use crate::error::{invalid, Result};
use crate::neural::DirectionField;

/// Forward-facing pinhole camera. Pixel rays are spaced at equal angles:
/// column `j` sits at azimuth `fov_h/2 - j fov_h/(w-1)` (left positive) and
/// row `i` at elevation `fov_v/2 - i fov_v/(h-1)` (up positive), so the
/// outermost rays span the full field of view.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    h_pixels: usize,
    w_pixels: usize,
    fov_h: f64,
    fov_v: f64,
    position: Vector3<f64>,
    heading: Vector3<f64>,
}

impl CameraModel {
    pub fn new(
        h_pixels: usize,
        w_pixels: usize,
        fov_h_deg: f64,
        fov_v_deg: f64,
        position: Vector3<f64>,
        heading: Vector3<f64>,
    ) -> Result<Self> {
        if h_pixels == 0 || w_pixels == 0 {
            return Err(invalid("resolution", "camera needs at least one pixel"));
        }
        for (name, fov) in [("fov_h", fov_h_deg), ("fov_v", fov_v_deg)] {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(invalid(
                    name,
                    format!("must lie in (0, 180) degrees, got {fov}"),
                ));
            }
        }
        if (heading.norm() - 1.0).abs() > 1e-9 {
            return Err(invalid("heading", "optical axis must be unit norm"));
        }
        Ok(Self {
            h_pixels,
            w_pixels,
            fov_h: fov_h_deg,
            fov_v: fov_v_deg,
            position,
            heading,
        })
    }

    pub fn rows(&self) -> usize {
        self.h_pixels
    }

    pub fn cols(&self) -> usize {
        self.w_pixels
    }

    pub fn fov_h(&self) -> f64 {
        self.fov_h
    }

    pub fn fov_v(&self) -> f64 {
        self.fov_v
    }

    pub fn position(&self) -> &Vector3<f64> {
        &self.position
    }

    pub fn heading(&self) -> &Vector3<f64> {
        &self.heading
    }

    /// Same intrinsics at a new pose.
    pub fn with_pose(&self, position: Vector3<f64>, heading: Vector3<f64>) -> Result<Self> {
        Self::new(
            self.h_pixels,
            self.w_pixels,
            self.fov_h,
            self.fov_v,
            position,
            heading,
        )
    }

    /// Azimuth (radians, left positive) at a possibly fractional column.
    pub fn azimuth(&self, col: f64) -> f64 {
        angle_at(self.fov_h, self.w_pixels, col)
    }

    /// Elevation (radians, up positive) at a possibly fractional row.
    pub fn elevation(&self, row: f64) -> f64 {
        angle_at(self.fov_v, self.h_pixels, row)
    }

    /// Body-frame ray (x forward, y left, z up) at fractional pixel coordinates.
    pub fn body_ray(&self, row: f64, col: f64) -> Vector3<f64> {
        let (az, el) = (self.azimuth(col), self.elevation(row));
        Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }

    /// Body-to-world rotation columns `(forward, left, up)`.
    fn frame(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let forward = self.heading;
        let left = Vector3::z()
            .cross(&forward)
            .try_normalize(1e-12)
            .unwrap_or_else(|| forward.cross(&Vector3::x()).normalize());
        let up = forward.cross(&left);
        (forward, left, up)
    }

    pub fn to_world(&self, body: &Vector3<f64>) -> Vector3<f64> {
        let (f, l, u) = self.frame();
        f * body.x + l * body.y + u * body.z
    }

    /// Rays for all pixels in world coordinates, row-major.
    pub fn world_rays(&self) -> Vec<Vector3<f64>> {
        let body = pixel_rays(self);
        body.columns().iter().map(|r| self.to_world(r)).collect()
    }
}

fn angle_at(fov_deg: f64, n: usize, idx: f64) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let fov = fov_deg.to_radians();
    fov / 2.0 - idx * fov / (n - 1) as f64
}

/// Body-frame unit ray of every pixel, row-major. The optical axis is +x.
pub fn pixel_rays(camera: &CameraModel) -> DirectionField {
    let mut rays = Vec::with_capacity(camera.rows() * camera.cols());
    for r in 0..camera.rows() {
        for c in 0..camera.cols() {
            rays.push(camera.body_ray(r as f64, c as f64));
        }
    }
    DirectionField::from_unnormalized(rays).expect("equal-angle rays are never zero")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera(h: usize, w: usize, fov: f64) -> CameraModel {
        CameraModel::new(h, w, fov, fov, Vector3::zeros(), Vector3::x()).unwrap()
    }

    #[test]
    fn centre_pixel_is_optical_axis() {
        for (h, w) in [(1, 1), (3, 3), (5, 9), (63, 33)] {
            let cam = camera(h, w, 110.0);
            let rays = pixel_rays(&cam);
            let centre = rays.column((h / 2) * w + w / 2);
            assert!((centre - Vector3::x()).norm() < 1e-12);
        }
        // Same in world frame for a rotated pose.
        let heading = Vector3::new(0.6, -0.8, 0.0);
        let cam = camera(5, 5, 90.0)
            .with_pose(Vector3::new(1.0, 2.0, 0.0), heading)
            .unwrap();
        let centre = cam.world_rays()[12];
        assert!((centre - heading).norm() < 1e-12);
    }

    #[test]
    fn extreme_columns_span_fov() {
        let cam = camera(1, 64, 110.0);
        let rays = pixel_rays(&cam);
        let span = rays
            .column(0)
            .dot(rays.column(63))
            .clamp(-1.0, 1.0)
            .acos()
            .to_degrees();
        let pitch = 110.0 / 64.0;
        assert!((span - 110.0).abs() <= pitch / 2.0);
        assert!(rays
            .columns()
            .iter()
            .all(|r| (r.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn three_by_three_table() {
        let cam = camera(3, 3, 90.0);
        let rays = pixel_rays(&cam);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // Rows top to bottom, columns left to right.
        let table = [
            [0.5, 0.5, h],
            [h, 0.0, h],
            [0.5, -0.5, h],
            [h, h, 0.0],
            [1.0, 0.0, 0.0],
            [h, -h, 0.0],
            [0.5, 0.5, -h],
            [h, 0.0, -h],
            [0.5, -0.5, -h],
        ];
        for (i, t) in table.iter().enumerate() {
            let expected = Vector3::new(t[0], t[1], t[2]);
            assert!((rays.column(i) - expected).norm() < 1e-12, "pixel {i}");
        }
    }

    #[test]
    fn left_of_heading_is_positive_azimuth() {
        let cam = camera(1, 3, 90.0)
            .with_pose(Vector3::zeros(), Vector3::y())
            .unwrap();
        let rays = cam.world_rays();
        // Facing +y, the leftmost column looks toward -x.
        assert!(rays[0].x < 0.0 && rays[0].y > 0.0);
    }

    #[test]
    fn rejects_bad_cameras() {
        assert!(CameraModel::new(0, 4, 90.0, 90.0, Vector3::zeros(), Vector3::x()).is_err());
        assert!(CameraModel::new(4, 4, 180.0, 90.0, Vector3::zeros(), Vector3::x()).is_err());
        assert!(CameraModel::new(
            4,
            4,
            90.0,
            90.0,
            Vector3::zeros(),
            Vector3::new(2.0, 0.0, 0.0)
        )
        .is_err());
    }
}
