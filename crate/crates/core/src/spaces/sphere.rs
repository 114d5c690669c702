use std::f64::consts::PI;

use super::{Geodesic, Point, Space, TangentVector};

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn axpy(s: f64, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [s * a[0] + b[0], s * a[1] + b[1], s * a[2] + b[2]]
}

/// Angle between unit vectors, accurate at both ends of `[0, π]`.
pub(crate) fn angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Orthonormal frame `(e_θ, e_φ)` at `x`.
pub(crate) fn frame(x: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let rho = x[0].hypot(x[1]);
    let e_phi = if rho < 1e-12 { [0.0, 1.0, 0.0] } else { [-x[1] / rho, x[0] / rho, 0.0] };
    let e_theta = cross(e_phi, x);
    let n = norm(e_theta);
    (scale(e_theta, 1.0 / n), e_phi)
}

pub(super) fn is_antipodal(x: [f64; 3], y: [f64; 3], tol: f64) -> bool {
    PI - angle(x, y) <= tol
}

/// `exp` on the sphere of curvature `k`; `v` is in the frame at `x`.
pub(super) fn exp(k: f64, x: &Point, v: [f64; 2]) -> Point {
    let len = v[0].hypot(v[1]);
    if len == 0.0 {
        return *x;
    }
    let p = x.xyz();
    let (e_t, e_p) = frame(p);
    let u = axpy(v[0] / len, e_t, scale(e_p, v[1] / len));
    let a = len * k.sqrt();
    let q = axpy(a.cos(), p, scale(u, a.sin()));
    let n = norm(q);
    Point::unit(q[0] / n, q[1] / n, q[2] / n)
}

/// Unit direction at `x` towards `y` in frame components, or `None` for
/// `y = ±x`.
fn direction(x: [f64; 3], y: [f64; 3]) -> Option<[f64; 2]> {
    let t = axpy(-dot(x, y), x, y);
    let n = norm(t);
    if n == 0.0 || n < 1e-300 {
        return None;
    }
    let (e_t, e_p) = frame(x);
    let (a, b) = (dot(t, e_t), dot(t, e_p));
    let m = a.hypot(b);
    Some([a / m, b / m])
}

pub(super) fn geodesic(k: f64, x: &Point, y: &Point) -> Geodesic {
    let (p, q) = (x.xyz(), y.xyz());
    let length = angle(p, q) / k.sqrt();
    // antipodal pairs: every direction is minimal; angle coordinate 0 is e_θ
    let dir = direction(p, q).unwrap_or([1.0, 0.0]);
    Geodesic {
        space: Space::Sphere { curvature: k },
        start: *x,
        end: *y,
        direction: Some(TangentVector::new(*x, dir)),
        length,
        passes_through_apex: false,
    }
}
