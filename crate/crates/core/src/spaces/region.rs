use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::{cone, Point, Space};
use crate::error::{invalid, Result};

/// A bounded sampling region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    /// Axis-aligned rectangle in the plane.
    Rect { x_min: f64, x_max: f64, y_min: f64, y_max: f64 },
    /// Deterministic `nx × ny` lattice of cell centres of a rectangle.
    Grid { x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize },
    /// `r_min ≤ r ≤ r_max` around the cone apex (or the plane origin).
    Annulus { r_min: f64, r_max: f64 },
    /// Spherical cap of polar radius `max_polar` around the north pole.
    Cap { max_polar: f64 },
}

impl Region {
    pub fn unit_square() -> Self {
        Region::Rect { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0 }
    }

    pub(crate) fn validate(&self, space: &Space) -> Result<()> {
        let ok = match *self {
            Region::Rect { x_min, x_max, y_min, y_max } | Region::Grid { x_min, x_max, y_min, y_max, .. } => {
                matches!(space, Space::Plane) && x_min < x_max && y_min < y_max
            }
            Region::Annulus { r_min, r_max } => {
                matches!(space, Space::Plane | Space::Cone { .. }) && 0.0 <= r_min && r_min < r_max && r_max.is_finite()
            }
            Region::Cap { max_polar } => matches!(space, Space::Sphere { .. }) && max_polar > 0.0 && max_polar <= PI,
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("region {self:?} does not fit {space:?}"))
        }
    }

    pub(super) fn sample(&self, space: &Space, n: usize, seed: u64) -> Result<Vec<Point>> {
        self.sample_with(space, n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub(crate) fn sample_with<R: Rng>(&self, space: &Space, n: usize, rng: &mut R) -> Result<Vec<Point>> {
        self.validate(space)?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let pts = match *self {
            Region::Rect { x_min, x_max, y_min, y_max } => (0..n)
                .map(|_| {
                    let x = x_min + (x_max - x_min) * rng.random::<f64>();
                    let y = y_min + (y_max - y_min) * rng.random::<f64>();
                    Point::planar(x, y)
                })
                .collect(),
            Region::Grid { x_min, x_max, y_min, y_max, nx, ny } => {
                if n != nx * ny {
                    return invalid(format!("a {nx}x{ny} grid has {} points, {n} requested", nx * ny));
                }
                let hx = (x_max - x_min) / nx as f64;
                let hy = (y_max - y_min) / ny as f64;
                (0..ny)
                    .flat_map(|j| (0..nx).map(move |i| (i, j)))
                    .map(|(i, j)| Point::planar(x_min + (i as f64 + 0.5) * hx, y_min + (j as f64 + 0.5) * hy))
                    .collect()
            }
            Region::Annulus { r_min, r_max } => {
                let (a, b) = (r_min * r_min, r_max * r_max);
                (0..n)
                    .map(|_| {
                        let r = (a + (b - a) * rng.random::<f64>()).sqrt();
                        let u = rng.random::<f64>();
                        match *space {
                            Space::Cone { total_angle } => cone::canonical(total_angle, r, total_angle * u),
                            _ => Point::planar(r * (TAU * u).cos(), r * (TAU * u).sin()),
                        }
                    })
                    .collect()
            }
            Region::Cap { max_polar } => {
                let lo = max_polar.cos();
                (0..n)
                    .map(|_| {
                        let z = 1.0 - (1.0 - lo) * rng.random::<f64>();
                        let a = TAU * rng.random::<f64>();
                        let s = (1.0 - z * z).max(0.0).sqrt();
                        let v = [s * a.cos(), s * a.sin(), z];
                        let m = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                        Point::unit(v[0] / m, v[1] / m, v[2] / m)
                    })
                    .collect()
            }
        };
        Ok(pts)
    }
}
