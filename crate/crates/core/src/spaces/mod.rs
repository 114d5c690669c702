//! Exact geodesic geometry of the three model surfaces: the Euclidean plane,
//! the round sphere of curvature `k`, and the Euclidean cone of total angle
//! `θ` with its apex.
//!
//! Point encodings are fixed per space:
//!
//! * plane: `(x, y)`
//! * sphere: a unit vector in R³ (the sphere of curvature `k` is the unit
//!   sphere rescaled by `1/√k`, so distances are `angle / √k`)
//! * cone: polar `(r, φ)` with `r ≥ 0` and `φ ∈ [0, θ)`; the apex is `(0, 0)`
//!
//! Tangent vectors are stored as two components in a fixed orthonormal frame
//! at their base point. The plane uses the global axes. The cone uses
//! `(radial, angular)`. The sphere uses `(∂θ, ∂φ / sin θ)` in polar/azimuth
//! coordinates about the z axis; at the poles the frame is the limit along
//! the meridian `φ = 0`, i.e. `e_θ = (±1, 0, 0)`, `e_φ = (0, 1, 0)`.
//!
//! When several minimal geodesics join two points the one whose initial
//! direction has the smallest angle coordinate `atan2(v₁, v₀) ∈ [0, 2π)` is
//! returned.

mod chart;
mod cone;
mod plane;
mod region;
pub(crate) mod sphere;

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Error, Result};

pub use chart::Chart;
pub use region::Region;

/// Default tolerance for geometric predicates.
pub const GEOM_TOL: f64 = 1e-9;

/// Tolerance on `|x| = 1` for sphere coordinates.
pub const UNIT_NORM_TOL: f64 = 1e-12;

const FLAT_ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub enum Space {
    Plane,
    Sphere { curvature: f64 },
    Cone { total_angle: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SpaceRepr {
    Plane,
    Sphere { curvature: f64 },
    Cone { total_angle: f64 },
}

impl TryFrom<SpaceRepr> for Space {
    type Error = Error;

    fn try_from(repr: SpaceRepr) -> Result<Self> {
        match repr {
            SpaceRepr::Plane => Ok(Space::Plane),
            SpaceRepr::Sphere { curvature } => Space::sphere(curvature),
            SpaceRepr::Cone { total_angle } => Space::cone(total_angle),
        }
    }
}

impl From<Space> for SpaceRepr {
    fn from(space: Space) -> Self {
        match space {
            Space::Plane => SpaceRepr::Plane,
            Space::Sphere { curvature } => SpaceRepr::Sphere { curvature },
            Space::Cone { total_angle } => SpaceRepr::Cone { total_angle },
        }
    }
}

/// A point of one of the model spaces. Which space it belongs to is not
/// recorded; every operation takes the [`Space`] explicitly and validates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn planar(x: f64, y: f64) -> Self {
        Point { coords: [x, y, 0.0], dim: 2 }
    }

    pub fn polar(r: f64, phi: f64) -> Self {
        Point { coords: [r, phi, 0.0], dim: 2 }
    }

    pub fn unit(x: f64, y: f64, z: f64) -> Self {
        Point { coords: [x, y, z], dim: 3 }
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        match *coords {
            [a, b] => Ok(Point::planar(a, b)),
            [a, b, c] => Ok(Point::unit(a, b, c)),
            _ => invalid(format!("a point has 2 or 3 coordinates, got {}", coords.len())),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub(crate) fn xy(&self) -> [f64; 2] {
        [self.coords[0], self.coords[1]]
    }

    pub(crate) fn xyz(&self) -> [f64; 3] {
        self.coords
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Point::from_slice(&coords).map_err(serde::de::Error::custom)
    }
}

/// A tangent vector at a regular point, in the frame documented at module level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentVector {
    pub base: Point,
    pub components: [f64; 2],
}

impl TangentVector {
    pub fn new(base: Point, components: [f64; 2]) -> Self {
        TangentVector { base, components }
    }

    pub fn norm(&self) -> f64 {
        self.components[0].hypot(self.components[1])
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector::new(self.base, [s * self.components[0], s * self.components[1]])
    }

    /// Angle coordinate of the direction in `[0, 2π)`; used for tie-breaks.
    pub fn angle(&self) -> f64 {
        self.components[1].atan2(self.components[0]).rem_euclid(TAU)
    }
}

/// A minimal unit-speed geodesic from `start` to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub space: Space,
    pub start: Point,
    pub end: Point,
    /// Unit initial direction. `None` when `start` is a singular cone apex.
    pub direction: Option<TangentVector>,
    pub length: f64,
    /// Cone only: the apex lies on the geodesic (endpoints included).
    pub passes_through_apex: bool,
}

impl Geodesic {
    /// The point at arc length `t`, clamped to `[0, length]`.
    pub fn at(&self, t: f64) -> Point {
        let t = t.clamp(0.0, self.length);
        match self.space {
            Space::Plane => plane::lerp(&self.start, &self.end, t / self.length),
            Space::Sphere { curvature } => {
                let dir = self.direction.expect("sphere points are regular");
                sphere::exp(curvature, &self.start, dir.scaled(t).components)
            }
            Space::Cone { total_angle } => cone::geodesic_at(total_angle, self, t),
        }
    }
}

/// Result of [`Space::log_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logarithm {
    pub vector: TangentVector,
    /// `false` when several minimal geodesics tie and the tie-break picked one.
    pub unique: bool,
    /// Cone only: the minimal geodesic runs through the apex in its interior.
    /// On a cone of angle other than 2π, `exp_map` of `vector` then continues
    /// straight through the apex and does not come back to `y`.
    pub through_apex: bool,
}

impl Space {
    pub fn plane() -> Self {
        Space::Plane
    }

    pub fn sphere(curvature: f64) -> Result<Self> {
        if !(curvature.is_finite() && curvature > 0.0) {
            return invalid(format!("sphere curvature must be positive, got {curvature}"));
        }
        Ok(Space::Sphere { curvature })
    }

    pub fn cone(total_angle: f64) -> Result<Self> {
        if !(total_angle.is_finite() && total_angle > 0.0) {
            return invalid(format!("cone total angle must be positive, got {total_angle}"));
        }
        Ok(Space::Cone { total_angle })
    }

    /// Natural lower curvature bound of the space when it is an Alexandrov
    /// space: 0 for the plane and for cones of angle at most 2π, `k` for the sphere.
    pub fn curvature_bound(&self) -> f64 {
        match *self {
            Space::Sphere { curvature } => curvature,
            _ => 0.0,
        }
    }

    pub fn is_alexandrov(&self) -> bool {
        match *self {
            Space::Cone { total_angle } => total_angle <= TAU + FLAT_ANGLE_TOL,
            _ => true,
        }
    }

    /// Diameter of the space, `∞` when unbounded.
    pub fn diameter(&self) -> f64 {
        match *self {
            Space::Sphere { curvature } => PI / curvature.sqrt(),
            _ => f64::INFINITY,
        }
    }

    pub(crate) fn is_flat_cone(total_angle: f64) -> bool {
        (total_angle - TAU).abs() <= FLAT_ANGLE_TOL
    }

    /// Validates `p` for this space and returns its canonical encoding.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        let p = Point::from_slice(coords)?;
        self.canonical(&p)
    }

    pub fn canonical(&self, p: &Point) -> Result<Point> {
        if p.coords().iter().any(|c| !c.is_finite()) {
            return invalid(format!("non-finite coordinates {:?}", p.coords()));
        }
        match *self {
            Space::Plane => {
                if p.dim != 2 {
                    return invalid("plane points have 2 coordinates");
                }
                Ok(*p)
            }
            Space::Sphere { .. } => {
                if p.dim != 3 {
                    return invalid("sphere points are unit vectors in R^3");
                }
                let n = sphere::norm(p.coords);
                if (n - 1.0).abs() > UNIT_NORM_TOL {
                    return invalid(format!("sphere point has norm {n}, expected 1"));
                }
                Ok(*p)
            }
            Space::Cone { total_angle } => {
                if p.dim != 2 {
                    return invalid("cone points are (r, phi)");
                }
                let [r, phi] = p.xy();
                if r < 0.0 {
                    return invalid(format!("cone radius must be non-negative, got {r}"));
                }
                Ok(cone::canonical(total_angle, r, phi))
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        let x = self.canonical(x)?;
        let y = self.canonical(y)?;
        Ok(self.dist(&x, &y))
    }

    /// Distance between points already known to be valid.
    pub(crate) fn dist(&self, x: &Point, y: &Point) -> f64 {
        match *self {
            Space::Plane => plane::dist(x, y),
            Space::Sphere { curvature } => sphere::angle(x.xyz(), y.xyz()) / curvature.sqrt(),
            Space::Cone { total_angle } => cone::dist(total_angle, x, y),
        }
    }

    pub fn geodesic_between(&self, x: &Point, y: &Point) -> Result<Geodesic> {
        let x = self.canonical(x)?;
        let y = self.canonical(y)?;
        if self.dist(&x, &y) == 0.0 {
            return Err(Error::Degenerate("geodesic between a point and itself".into()));
        }
        Ok(match *self {
            Space::Plane => plane::geodesic(&x, &y),
            Space::Sphere { curvature } => sphere::geodesic(curvature, &x, &y),
            Space::Cone { total_angle } => cone::geodesic(total_angle, &x, &y),
        })
    }

    /// Whether the minimal geodesic between distinct points is unique, using
    /// the default tolerance on the tie test.
    pub fn geodesic_is_unique(&self, x: &Point, y: &Point) -> Result<bool> {
        self.geodesic_is_unique_tol(x, y, GEOM_TOL)
    }

    pub fn geodesic_is_unique_tol(&self, x: &Point, y: &Point, tol: f64) -> Result<bool> {
        let x = self.canonical(x)?;
        let y = self.canonical(y)?;
        if self.dist(&x, &y) == 0.0 {
            return Err(Error::Degenerate("uniqueness of a geodesic from a point to itself".into()));
        }
        Ok(match *self {
            Space::Plane => true,
            Space::Sphere { .. } => !sphere::is_antipodal(x.xyz(), y.xyz(), tol),
            Space::Cone { total_angle } => cone::is_unique(total_angle, &x, &y, tol),
        })
    }

    /// Follows the geodesic from `v.base` in direction `v` for arc length `|v|`.
    pub fn exp_map(&self, v: &TangentVector) -> Result<Point> {
        let base = self.canonical(&v.base)?;
        if !self.regular(&base) {
            return Err(Error::Singular("exp_map based at the cone apex".into()));
        }
        if v.components.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite tangent vector");
        }
        Ok(match *self {
            Space::Plane => plane::exp(&base, v.components),
            Space::Sphere { curvature } => sphere::exp(curvature, &base, v.components),
            Space::Cone { total_angle } => cone::exp(total_angle, &base, v.components),
        })
    }

    /// Initial velocity of the minimal geodesic from `x` to `y`, scaled to
    /// length `d(x, y)`. `x = y` yields the zero vector.
    pub fn log_map(&self, x: &Point, y: &Point) -> Result<Logarithm> {
        let x = self.canonical(x)?;
        let y = self.canonical(y)?;
        if !self.regular(&x) {
            return Err(Error::Singular("log_map based at the cone apex".into()));
        }
        if self.dist(&x, &y) == 0.0 {
            return Ok(Logarithm { vector: TangentVector::new(x, [0.0, 0.0]), unique: true, through_apex: false });
        }
        let g = self.geodesic_between(&x, &y)?;
        let unique = self.geodesic_is_unique(&x, &y)?;
        let dir = g.direction.expect("regular base has a direction");
        Ok(Logarithm {
            vector: dir.scaled(g.length),
            unique,
            through_apex: g.passes_through_apex && x.coords[0] > 0.0 && y.coords[0] > 0.0,
        })
    }

    pub fn is_regular(&self, x: &Point) -> Result<bool> {
        let x = self.canonical(x)?;
        Ok(self.regular(&x))
    }

    pub(crate) fn regular(&self, x: &Point) -> bool {
        match *self {
            Space::Cone { total_angle } => x.coords[0] > 0.0 || Space::is_flat_cone(total_angle),
            _ => true,
        }
    }

    /// Exact (cone, plane) or normal-coordinate (sphere) chart centred at `x`,
    /// aligned with the tangent frame at `x`.
    pub fn local_chart(&self, x: &Point, radius: f64) -> Result<Chart> {
        let x = self.canonical(x)?;
        Chart::new(*self, x, radius)
    }

    /// Largest radius accepted by [`Space::local_chart`] at `x` (exclusive).
    pub fn chart_radius(&self, x: &Point) -> Result<f64> {
        let x = self.canonical(x)?;
        Ok(chart::max_radius(*self, &x))
    }

    /// `n` i.i.d. points uniform for the area measure restricted to `region`.
    pub fn sample_region(&self, region: &Region, n: usize, seed: u64) -> Result<Vec<Point>> {
        region.sample(self, n, seed)
    }

    /// Smallest angle at `x` between the unit direction `u` and the minimal
    /// geodesics from `x` to `y` (at most two on these spaces, except for
    /// antipodal points on the sphere where every direction is minimal).
    pub fn min_angle(&self, x: &Point, u: [f64; 2], y: &Point) -> Result<f64> {
        let x = self.canonical(x)?;
        let y = self.canonical(y)?;
        if !self.regular(&x) {
            return Err(Error::Singular("angles at the cone apex".into()));
        }
        if self.dist(&x, &y) == 0.0 {
            return Err(Error::Degenerate("angle towards the base point itself".into()));
        }
        let dirs: Vec<[f64; 2]> = match *self {
            Space::Sphere { .. } if sphere::is_antipodal(x.xyz(), y.xyz(), GEOM_TOL) => return Ok(0.0),
            Space::Cone { total_angle } if x.coords[0] > 0.0 => cone::minimal_directions(total_angle, &x, &y, GEOM_TOL),
            _ => {
                let g = self.geodesic_between(&x, &y)?;
                vec![g.direction.expect("regular base").components]
            }
        };
        let n = u[0].hypot(u[1]);
        Ok(dirs.iter().map(|w| ((u[0] * w[0] + u[1] * w[1]) / n).clamp(-1.0, 1.0).acos()).fold(f64::INFINITY, f64::min))
    }

    /// Lower bound on the distance from `x` to the cut locus of `y`, `∞`
    /// when `y` has no cut locus.
    pub(crate) fn cut_margin(&self, x: &Point, y: &Point) -> f64 {
        match *self {
            Space::Plane => f64::INFINITY,
            Space::Sphere { curvature } => (PI - sphere::angle(x.xyz(), y.xyz())) / curvature.sqrt(),
            Space::Cone { total_angle } => cone::cut_margin(total_angle, x, y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn space_json_shapes() {
        let cone: Space = serde_json::from_str(r#"{"kind":"cone","total_angle":2.5}"#).unwrap();
        assert_eq!(cone, Space::Cone { total_angle: 2.5 });
        let sphere: Space = serde_json::from_str(r#"{"kind":"sphere","curvature":1.0}"#).unwrap();
        assert_eq!(sphere, Space::Sphere { curvature: 1.0 });
        let plane: Space = serde_json::from_str(r#"{"kind":"plane"}"#).unwrap();
        assert_eq!(plane, Space::Plane);
        assert_eq!(serde_json::to_string(&plane).unwrap(), r#"{"kind":"plane"}"#);
        assert!(serde_json::from_str::<Space>(r#"{"kind":"sphere","curvature":-1.0}"#).is_err());
        assert!(serde_json::from_str::<Space>(r#"{"kind":"cone","total_angle":0.0}"#).is_err());
    }

    #[test]
    fn validation_errors() {
        let s = Space::sphere(1.0).unwrap();
        assert!(matches!(s.distance(&Point::unit(1.0, 0.1, 0.0), &Point::unit(1.0, 0.0, 0.0)), Err(Error::Validation(_))));
        let c = Space::cone(PI).unwrap();
        assert!(matches!(c.distance(&Point::polar(-1.0, 0.0), &Point::polar(1.0, 0.0)), Err(Error::Validation(_))));
        assert!(Space::Plane.distance(&Point::unit(0.0, 0.0, 1.0), &Point::planar(0.0, 0.0)).is_err());
    }

    #[test]
    fn apex_is_canonicalised() {
        let c = Space::cone(PI).unwrap();
        assert_eq!(c.point(&[0.0, 2.5]).unwrap(), Point::polar(0.0, 0.0));
        let p = c.point(&[1.0, PI + 0.5]).unwrap();
        assert_abs_diff_eq!(p.coords()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn regularity() {
        let c = Space::cone(PI).unwrap();
        assert!(!c.is_regular(&Point::polar(0.0, 0.0)).unwrap());
        assert!(c.is_regular(&Point::polar(0.1, 0.0)).unwrap());
        assert!(Space::cone(TAU).unwrap().is_regular(&Point::polar(0.0, 0.0)).unwrap());
        let s = Space::sphere(1.0).unwrap();
        assert!(s.is_regular(&Point::unit(0.0, 0.0, 1.0)).unwrap());
        assert!(Space::Plane.is_regular(&Point::planar(3.0, -2.0)).unwrap());
    }

    #[test]
    fn singular_base_rejected() {
        let c = Space::cone(PI).unwrap();
        let apex = Point::polar(0.0, 0.0);
        assert!(matches!(c.exp_map(&TangentVector::new(apex, [1.0, 0.0])), Err(Error::Singular(_))));
        assert!(matches!(c.log_map(&apex, &Point::polar(1.0, 0.0)), Err(Error::Singular(_))));
        assert!(matches!(c.local_chart(&apex, 0.1), Err(Error::Chart(_))));
    }

    #[test]
    fn log_of_same_point_is_zero() {
        let x = Point::planar(1.0, 2.0);
        let l = Space::Plane.log_map(&x, &x).unwrap();
        assert_eq!(l.vector.components, [0.0, 0.0]);
    }

    #[test]
    fn degenerate_geodesic() {
        let x = Point::planar(1.0, 2.0);
        assert!(matches!(Space::Plane.geodesic_between(&x, &x), Err(Error::Degenerate(_))));
        assert!(matches!(Space::Plane.geodesic_is_unique(&x, &x), Err(Error::Degenerate(_))));
    }
}
