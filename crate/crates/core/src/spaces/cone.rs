//! Euclidean cone of total angle `θ`. Geodesics avoiding the apex are
//! straight segments in the development of the cone onto the plane; a pair
//! whose angular separation is at least π is joined through the apex.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Geodesic, Point, Space, TangentVector};

pub(super) fn canonical(theta: f64, r: f64, phi: f64) -> Point {
    if r == 0.0 {
        return Point::polar(0.0, 0.0);
    }
    let mut a = phi.rem_euclid(theta);
    if a >= theta {
        a = 0.0;
    }
    Point::polar(r, a)
}

/// Signed angular offset from `a` to `b`, the representative of smallest
/// magnitude; `+θ/2` on exact ties.
pub(crate) fn signed_sep(theta: f64, a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(theta);
    if d <= theta - d {
        d
    } else {
        d - theta
    }
}

pub(super) fn dist(theta: f64, x: &Point, y: &Point) -> f64 {
    let [r1, p1] = x.xy();
    let [r2, p2] = y.xy();
    let delta = signed_sep(theta, p1, p2).abs();
    if delta >= PI {
        return r1 + r2;
    }
    let h = (0.5 * delta).sin();
    ((r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * h * h).sqrt()
}

fn through_apex(theta: f64, x: &Point, y: &Point) -> bool {
    let [r1, p1] = x.xy();
    let [r2, p2] = y.xy();
    r1 == 0.0 || r2 == 0.0 || signed_sep(theta, p1, p2).abs() >= PI
}

pub(super) fn geodesic(theta: f64, x: &Point, y: &Point) -> Geodesic {
    let space = Space::Cone { total_angle: theta };
    let [r1, p1] = x.xy();
    let [r2, p2] = y.xy();
    let length = dist(theta, x, y);
    let radial = through_apex(theta, x, y);
    let direction = if r1 == 0.0 {
        // only the flat cone has tangent data at the apex: cartesian axes
        Space::is_flat_cone(theta).then(|| TangentVector::new(*x, [p2.cos(), p2.sin()]))
    } else if radial {
        Some(TangentVector::new(*x, [-1.0, 0.0]))
    } else {
        let s = signed_sep(theta, p1, p2);
        let d = [r2 * s.cos() - r1, r2 * s.sin()];
        let n = d[0].hypot(d[1]);
        Some(TangentVector::new(*x, [d[0] / n, d[1] / n]))
    };
    Geodesic { space, start: *x, end: *y, direction, length, passes_through_apex: radial }
}

pub(super) fn geodesic_at(theta: f64, g: &Geodesic, t: f64) -> Point {
    let [r1, p1] = g.start.xy();
    let [r2, p2] = g.end.xy();
    if g.passes_through_apex {
        return if t <= r1 { canonical(theta, r1 - t, p1) } else { canonical(theta, t - r1, p2) };
    }
    let s = signed_sep(theta, p1, p2);
    let w = t / g.length;
    let px = r1 + w * (r2 * s.cos() - r1);
    let py = w * r2 * s.sin();
    canonical(theta, px.hypot(py), p1 + py.atan2(px))
}

pub(super) fn exp(theta: f64, x: &Point, v: [f64; 2]) -> Point {
    let [r, phi] = x.xy();
    if r == 0.0 {
        // flat cone apex, cartesian frame
        return canonical(theta, v[0].hypot(v[1]), v[1].atan2(v[0]));
    }
    let px = r + v[0];
    let py = v[1];
    if py == 0.0 && px <= 0.0 {
        // aimed exactly at the apex: continue straight through it
        return canonical(theta, -px, phi + PI);
    }
    canonical(theta, px.hypot(py), phi + py.atan2(px))
}

pub(super) fn is_unique(theta: f64, x: &Point, y: &Point, tol: f64) -> bool {
    let [r1, p1] = x.xy();
    let [r2, p2] = y.xy();
    if r1 == 0.0 || r2 == 0.0 {
        return true;
    }
    let d = (p2 - p1).rem_euclid(theta);
    let (lo, hi) = if d <= theta - d { (d, theta - d) } else { (theta - d, d) };
    // two straight side developments of equal length
    !(hi < PI && hi - lo <= tol)
}

/// Unit initial directions at `x` (with `r > 0`) of every minimal geodesic
/// to `y`.
pub(super) fn minimal_directions(theta: f64, x: &Point, y: &Point, tol: f64) -> Vec<[f64; 2]> {
    let [r1, p1] = x.xy();
    let [r2, p2] = y.xy();
    if through_apex(theta, x, y) {
        return vec![[-1.0, 0.0]];
    }
    let d = (p2 - p1).rem_euclid(theta);
    let best = dist(theta, x, y);
    [d, d - theta]
        .into_iter()
        .filter(|a| a.abs() < PI)
        .filter_map(|a| {
            let v = [r2 * a.cos() - r1, r2 * a.sin()];
            let n = v[0].hypot(v[1]);
            (n <= best + tol).then(|| [v[0] / n, v[1] / n])
        })
        .collect()
}

pub(super) fn cut_margin(theta: f64, x: &Point, y: &Point) -> f64 {
    let [r1, p1] = x.xy();
    let [r2, p2] = y.xy();
    if r1 == 0.0 || r2 == 0.0 || theta >= 2.0 * PI {
        return f64::INFINITY;
    }
    // cut locus of y is the ray at angular offset θ/2
    let gap = 0.5 * theta - signed_sep(theta, p2, p1).abs();
    r1 * gap.min(FRAC_PI_2).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    /// Independent development oracle: lay x on the positive axis, try
    /// every lift of y within a few turns, keep straight chords that sweep
    /// less than π, and fall back to the path through the apex.
    fn unfolding_distance(theta: f64, x: [f64; 2], y: [f64; 2]) -> f64 {
        let mut best = x[0] + y[0];
        for k in -4i32..=4 {
            let a = y[1] - x[1] + k as f64 * theta;
            if a.abs() < PI {
                let (ux, uy) = (x[0], 0.0);
                let (vx, vy) = (y[0] * a.cos(), y[0] * a.sin());
                best = best.min((vx - ux).hypot(vy - uy));
            }
        }
        best
    }

    fn cone(theta: f64) -> Space {
        Space::cone(theta).unwrap()
    }

    #[test]
    fn apex_distance_is_radius() {
        let c = cone(PI);
        assert_eq!(c.distance(&Point::polar(0.0, 0.0), &Point::polar(2.5, 1.0)).unwrap(), 2.5);
    }

    #[test]
    fn full_angle_cone_is_the_plane() {
        let c = cone(TAU);
        assert_abs_diff_eq!(c.distance(&Point::polar(1.0, 0.0), &Point::polar(1.0, PI)).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn half_angle_cone_matches_unfolding() {
        let c = cone(PI);
        let d = c.distance(&Point::polar(1.0, 0.0), &Point::polar(1.0, PI / 2.0)).unwrap();
        let oracle = unfolding_distance(PI, [1.0, 0.0], [1.0, PI / 2.0]);
        // frozen: two symmetric chords of angle π/2, length √2
        assert_abs_diff_eq!(oracle, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d, oracle, epsilon = 1e-15);
        // and that pair sits on the cut locus
        assert!(!c.geodesic_is_unique(&Point::polar(1.0, 0.0), &Point::polar(1.0, PI / 2.0)).unwrap());
    }

    #[test]
    fn distance_matches_unfolding_on_grid() {
        for &theta in &[0.7, PI, 1.5 * PI, TAU, 3.0 * PI] {
            for i in 0..20 {
                for j in 0..20 {
                    let x = [0.3 + 0.1 * i as f64, (i as f64 * 0.37).rem_euclid(theta)];
                    let y = [0.2 + 0.13 * j as f64, (j as f64 * 0.91).rem_euclid(theta)];
                    let d = dist(theta, &Point::polar(x[0], x[1]), &Point::polar(y[0], y[1]));
                    assert_abs_diff_eq!(d, unfolding_distance(theta, x, y), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn wide_separation_goes_through_apex() {
        let c = cone(3.0 * PI);
        let x = Point::polar(1.0, 0.0);
        let y = Point::polar(2.0, 1.2 * PI);
        let g = c.geodesic_between(&x, &y).unwrap();
        assert!(g.passes_through_apex);
        assert_abs_diff_eq!(g.length, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(unfolding_distance(3.0 * PI, [1.0, 0.0], [2.0, 1.2 * PI]), 3.0, epsilon = 1e-15);
        assert_eq!(g.at(1.0), Point::polar(0.0, 0.0));
        let end = g.at(3.0);
        assert!(c.dist(&end, &y) < 1e-12);
        let l = c.log_map(&x, &y).unwrap();
        assert!(l.through_apex);
        assert!(l.unique);
    }

    #[test]
    fn uniqueness_on_three_halves_cone() {
        let c = cone(1.5 * PI);
        let x = Point::polar(1.0, 0.0);
        // separation θ/2 = 3π/4: the two side developments tie
        assert!(!c.geodesic_is_unique(&x, &Point::polar(1.3, 0.75 * PI)).unwrap());
        // separation π: the short side is π/2, unique
        assert!(c.geodesic_is_unique(&x, &Point::polar(1.0, PI)).unwrap());
        assert!(c.geodesic_is_unique(&x, &Point::polar(0.0, 0.0)).unwrap());
    }

    #[test]
    fn exp_through_apex_on_half_cone() {
        let c = cone(PI);
        let x = Point::polar(1.0, 0.0);
        let p = c.exp_map(&TangentVector::new(x, [-1.5, 0.0])).unwrap();
        // straight development continues at angle π from the incoming ray,
        // which is the same ray again on a cone of angle π
        assert_eq!(p, Point::polar(0.5, 0.0));
        let q = cone(1.5 * PI).exp_map(&TangentVector::new(x, [-1.5, 0.0])).unwrap();
        assert_eq!(q, Point::polar(0.5, PI));
        assert_eq!(c.exp_map(&TangentVector::new(x, [-1.0, 0.0])).unwrap(), Point::polar(0.0, 0.0));
    }

    #[test]
    fn geodesic_and_log_agree() {
        let c = cone(PI);
        let x = Point::polar(1.0, 0.2);
        let y = Point::polar(0.7, 1.4);
        let g = c.geodesic_between(&x, &y).unwrap();
        let l = c.log_map(&x, &y).unwrap();
        let d = g.direction.unwrap().components;
        assert_abs_diff_eq!(l.vector.components[0], d[0] * g.length, epsilon = 1e-15);
        assert_abs_diff_eq!(l.vector.components[1], d[1] * g.length, epsilon = 1e-15);
        let back = c.exp_map(&l.vector).unwrap();
        assert!(c.dist(&back, &y) < 1e-12);
        assert!(c.dist(&g.at(g.length), &y) < 1e-12);
    }

    #[test]
    fn tie_break_picks_positive_side() {
        let c = cone(PI);
        let x = Point::polar(1.0, 0.0);
        let y = Point::polar(1.0, PI / 2.0);
        let g = c.geodesic_between(&x, &y).unwrap();
        let dir = g.direction.unwrap();
        assert!(dir.angle() < PI);
        let l = c.log_map(&x, &y).unwrap();
        assert!(!l.unique);
    }

    #[test]
    fn flat_apex_has_cartesian_frame() {
        let c = cone(TAU);
        let apex = Point::polar(0.0, 0.0);
        let p = c.exp_map(&TangentVector::new(apex, [0.0, 2.0])).unwrap();
        assert_abs_diff_eq!(p.xy()[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.xy()[1], PI / 2.0, epsilon = 1e-15);
        let l = c.log_map(&apex, &Point::polar(3.0, 1.0)).unwrap();
        assert_abs_diff_eq!(l.vector.components[0], 3.0 * 1f64.cos(), epsilon = 1e-15);
    }
}
