use std::f64::consts::{FRAC_PI_2, TAU};

use super::{cone, sphere, Point, Space, TangentVector};
use crate::error::{Error, Result};

/// A chart around a regular point, mapping a ball to plane coordinates
/// aligned with the tangent frame at the base. Plane and cone charts are
/// exact isometries on the ball; the sphere chart is normal coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    space: Space,
    base: Point,
    radius: f64,
}

pub(super) fn max_radius(space: Space, x: &Point) -> f64 {
    match space {
        Space::Plane => f64::INFINITY,
        Space::Sphere { curvature } => FRAC_PI_2 / curvature.sqrt(),
        Space::Cone { total_angle } => {
            let r = x.xy()[0];
            if r == 0.0 {
                if Space::is_flat_cone(total_angle) {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                // the ball must fit in the development without meeting a
                // second lift of itself
                r * (total_angle.min(TAU) / 4.0).sin()
            }
        }
    }
}

impl Chart {
    pub(super) fn new(space: Space, base: Point, radius: f64) -> Result<Self> {
        if !space.regular(&base) {
            return Err(Error::Chart("no chart at a singular point".into()));
        }
        let limit = max_radius(space, &base);
        if !(radius > 0.0 && radius < limit) {
            return Err(Error::Chart(format!("radius {radius} outside (0, {limit}) at this point")));
        }
        Ok(Chart { space, base, radius })
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn forward(&self, p: &Point) -> Result<[f64; 2]> {
        let p = self.space.canonical(p)?;
        Ok(match self.space {
            Space::Plane => {
                let [a, b] = self.base.xy();
                let [c, d] = p.xy();
                [c - a, d - b]
            }
            Space::Sphere { curvature } => {
                let x = self.base.xyz();
                let q = p.xyz();
                let c = sphere::dot(x, q);
                let t = [q[0] - c * x[0], q[1] - c * x[1], q[2] - c * x[2]];
                let n = sphere::norm(t);
                if n == 0.0 {
                    [0.0, 0.0]
                } else {
                    let (e_t, e_p) = sphere::frame(x);
                    let s = sphere::angle(x, q) / curvature.sqrt() / n;
                    [s * sphere::dot(t, e_t), s * sphere::dot(t, e_p)]
                }
            }
            Space::Cone { total_angle } => {
                let [r, phi] = self.base.xy();
                let [rho, psi] = p.xy();
                if r == 0.0 {
                    [rho * psi.cos(), rho * psi.sin()]
                } else {
                    let s = cone::signed_sep(total_angle, phi, psi);
                    [rho * s.cos() - r, rho * s.sin()]
                }
            }
        })
    }

    pub fn inverse(&self, c: [f64; 2]) -> Result<Point> {
        self.space.exp_map(&TangentVector::new(self.base, c))
    }
}
