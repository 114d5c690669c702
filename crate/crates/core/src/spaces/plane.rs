use super::{Geodesic, Point, Space, TangentVector};

pub(super) fn dist(x: &Point, y: &Point) -> f64 {
    let [a, b] = x.xy();
    let [c, d] = y.xy();
    (c - a).hypot(d - b)
}

pub(super) fn lerp(x: &Point, y: &Point, s: f64) -> Point {
    let [a, b] = x.xy();
    let [c, d] = y.xy();
    Point::planar(a + s * (c - a), b + s * (d - b))
}

pub(super) fn exp(x: &Point, v: [f64; 2]) -> Point {
    let [a, b] = x.xy();
    Point::planar(a + v[0], b + v[1])
}

pub(super) fn geodesic(x: &Point, y: &Point) -> Geodesic {
    let [a, b] = x.xy();
    let [c, d] = y.xy();
    let length = dist(x, y);
    Geodesic {
        space: Space::Plane,
        start: *x,
        end: *y,
        direction: Some(TangentVector::new(*x, [(c - a) / length, (d - b) / length])),
        length,
        passes_through_apex: false,
    }
}
