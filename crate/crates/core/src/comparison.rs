//! Sampled certification of the triangle comparison inequality
//! `d(p, γ(t)) ≥ δ_k(p̄, γ̄(t))` against the model surface of curvature `k`,
//! plus comparison angles, strainers and the first variation formula.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spaces::{sphere, Geodesic, Point, Region, Space, TangentVector};

/// Distance between the endpoints of two sides `a`, `b` meeting at `angle`
/// in the model surface of curvature `k`.
pub fn model_distance(k: f64, a: f64, b: f64, angle: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Domain(format!("negative side lengths {a}, {b}")));
    }
    if !(0.0..=PI).contains(&angle) {
        return Err(Error::Domain(format!("angle {angle} outside [0, π]")));
    }
    if k == 0.0 {
        // (a − b)² + 4ab sin²(γ/2) is the law of cosines without cancellation
        let h = (0.5 * angle).sin();
        return Ok(((a - b) * (a - b) + 4.0 * a * b * h * h).sqrt());
    }
    let s = k.abs().sqrt();
    let h = (0.5 * angle).sin();
    if k > 0.0 {
        if a > PI / s || b > PI / s {
            return Err(Error::Domain(format!("side exceeds the model diameter π/√k = {}", PI / s)));
        }
        // haversine form: sin²(c/2) = sin²((a − b)/2) + sin a sin b sin²(γ/2)
        let d = (0.5 * s * (a - b)).sin();
        let hav = d * d + (s * a).sin() * (s * b).sin() * h * h;
        Ok(2.0 * hav.clamp(0.0, 1.0).sqrt().asin() / s)
    } else {
        let d = (0.5 * s * (a - b)).sinh();
        let hav = d * d + (s * a).sinh() * (s * b).sinh() * h * h;
        Ok(2.0 * hav.max(0.0).sqrt().asinh() / s)
    }
}

/// Model angle between sides `a` and `b` of a triangle with third side `c`.
/// The flag is set when the sides violate the triangle inequality beyond
/// rounding and the angle was clamped to 0 or π.
fn angle_from_sides(k: f64, a: f64, b: f64, c: f64) -> (f64, bool) {
    let cos = if k == 0.0 {
        (a * a + b * b - c * c) / (2.0 * a * b)
    } else if k > 0.0 {
        let s = k.sqrt();
        ((s * c).cos() - (s * a).cos() * (s * b).cos()) / ((s * a).sin() * (s * b).sin())
    } else {
        let s = (-k).sqrt();
        ((s * a).cosh() * (s * b).cosh() - (s * c).cosh()) / ((s * a).sinh() * (s * b).sinh())
    };
    let degenerate = !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&cos) || cos.is_nan();
    let angle = if cos.is_nan() { 0.0 } else { cos.clamp(-1.0, 1.0).acos() };
    (angle, degenerate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonAngle {
    pub angle: f64,
    /// Triangle inequality failed beyond tolerance; `angle` was clamped.
    pub degenerate: bool,
}

/// Angle at the comparison vertex of the model triangle with the same
/// three side lengths as `(vertex, x, y)`.
pub fn comparison_angle(space: &Space, vertex: &Point, x: &Point, y: &Point, k: f64) -> Result<ComparisonAngle> {
    let a = space.distance(vertex, x)?;
    let b = space.distance(vertex, y)?;
    let c = space.distance(x, y)?;
    if a == 0.0 || b == 0.0 {
        return Err(Error::Degenerate("comparison angle with a side of length 0".into()));
    }
    if k > 0.0 {
        let diam = PI / k.sqrt();
        if a > diam || b > diam || c > diam {
            return Err(Error::Domain("side exceeds the model diameter".into()));
        }
    }
    let (angle, degenerate) = angle_from_sides(k, a, b, c);
    Ok(ComparisonAngle { angle, degenerate })
}

/// `δ_k(p̄, γ̄(t))` for the model configuration with `d(p, γ(0)) = a`,
/// `d(p, γ(1)) = b`, `L(γ) = len`, at fraction `t` of the way along.
/// `None` when no comparison triangle exists.
pub fn comparison_point_distance(k: f64, a: f64, b: f64, len: f64, t: f64) -> Option<f64> {
    if k == 0.0 {
        // Stewart's theorem
        let sq = (1.0 - t) * a * a + t * b * b - t * (1.0 - t) * len * len;
        let scale = a * a + b * b + len * len;
        if sq < -1e-12 * scale {
            return None;
        }
        return Some(sq.max(0.0).sqrt());
    }
    if k > 0.0 {
        let s = k.sqrt();
        let (la, lb, ll) = (s * a, s * b, s * len);
        if la + lb + ll > 2.0 * PI + 1e-12 || ll >= PI || la > PI || lb > PI {
            return None;
        }
        if ll == 0.0 {
            return Some(a);
        }
        // ā = e₁, b̄ = (cos L, sin L, 0), p̄ = (cos A, y, z)
        let y = (lb.cos() - la.cos() * ll.cos()) / ll.sin();
        let sa = la.sin();
        let z2 = sa * sa - y * y;
        if z2 < -1e-12 {
            return None;
        }
        let p = [la.cos(), y, z2.max(0.0).sqrt()];
        let g = [(t * ll).cos(), (t * ll).sin(), 0.0];
        return Some(sphere::angle(p, g) / s);
    }
    let (alpha, degenerate) = angle_from_sides(k, a, len, b);
    if degenerate {
        return None;
    }
    model_distance(k, a, t * len, alpha).ok()
}

/// `d(p, γ(tL)) − δ_k(p̄, γ̄(t))` for the minimal geodesic γ from `a` to `b`.
/// `None` when the comparison configuration does not exist.
pub fn triangle_slack(space: &Space, k: f64, p: &Point, a: &Point, b: &Point, t: f64) -> Result<Option<f64>> {
    let g = space.geodesic_between(a, b)?;
    let q = g.at(t * g.length);
    let da = space.distance(p, a)?;
    let db = space.distance(p, b)?;
    let Some(model) = comparison_point_distance(k, da, db, g.length, t) else {
        return Ok(None);
    };
    Ok(Some(space.distance(p, &q)? - model))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub p: Point,
    pub start: Point,
    pub end: Point,
    pub t: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureConfig {
    pub space: Space,
    pub k: f64,
    pub region: Region,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub config: CurvatureConfig,
    pub samples: usize,
    pub evaluated: usize,
    /// Samples with no comparison configuration or coincident endpoints.
    pub skipped: usize,
    pub min_slack: f64,
    pub mean_slack: f64,
    pub witness: Option<Witness>,
    pub passed: bool,
}

/// Default sampling region: the unit square, the unit disk about the apex,
/// or the whole sphere.
pub fn default_region(space: &Space) -> Region {
    match space {
        Space::Plane => Region::unit_square(),
        Space::Cone { .. } => Region::Annulus { r_min: 0.0, r_max: 1.0 },
        Space::Sphere { .. } => Region::Cap { max_polar: PI },
    }
}

fn t_for_sample(i: usize, rng: &mut ChaCha8Rng) -> f64 {
    match i % 10 {
        9 => rng.random_range(0.0..1.0),
        j => (j + 1) as f64 / 10.0,
    }
}

pub fn check_triangle_comparison(space: &Space, k: f64, n_samples: usize, seed: u64, tol: f64) -> Result<ComparisonReport> {
    check_triangle_comparison_in(space, &default_region(space), k, n_samples, seed, tol)
}

pub fn check_triangle_comparison_in(
    space: &Space,
    region: &Region,
    k: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ComparisonReport> {
    // validates the region against the space
    region.validate(space)?;
    let outcomes: Vec<Result<Option<Witness>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let pts = region.sample_with(space, 3, &mut rng)?;
            let (p, a, b) = (pts[0], pts[1], pts[2]);
            let t = t_for_sample(i, &mut rng);
            if space.distance(&a, &b)? == 0.0 {
                return Ok(None);
            }
            Ok(triangle_slack(space, k, &p, &a, &b, t)?.map(|slack| Witness { p, start: a, end: b, t, slack }))
        })
        .collect();

    let mut evaluated = 0;
    let mut sum = 0.0;
    let mut witness: Option<Witness> = None;
    for w in outcomes {
        let Some(w) = w? else { continue };
        evaluated += 1;
        sum += w.slack;
        if witness.is_none_or(|best| w.slack < best.slack) {
            witness = Some(w);
        }
    }
    let min_slack = witness.map_or(f64::INFINITY, |w| w.slack);
    Ok(ComparisonReport {
        config: CurvatureConfig { space: *space, k, region: *region, samples: n_samples, seed, tol },
        samples: n_samples,
        evaluated,
        skipped: n_samples - evaluated,
        min_slack,
        mean_slack: if evaluated > 0 { sum / evaluated as f64 } else { 0.0 },
        witness,
        passed: min_slack >= -tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstVariationRow {
    pub t: f64,
    pub measured: f64,
    pub predicted: f64,
    pub error: f64,
}

pub const DEFAULT_T_GRID: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Compares `d(a, γ(t))` with `d(a, γ(0)) − t cos ∠_min`. The geodesic is
/// followed through `exp_map` from its start, so `t` may exceed its length.
pub fn check_first_variation(space: &Space, a: &Point, geodesic: &Geodesic, t_values: &[f64]) -> Result<Vec<FirstVariationRow>> {
    let x = geodesic.start;
    let u = geodesic.direction.ok_or_else(|| Error::Singular("geodesic starts at the cone apex".into()))?;
    let d0 = space.distance(a, &x)?;
    if d0 == 0.0 {
        return Err(Error::Degenerate("first variation towards the start point".into()));
    }
    let angle = space.min_angle(&x, u.components, a)?;
    let n = u.norm();
    t_values
        .iter()
        .map(|&t| {
            let q = space.exp_map(&TangentVector::new(x, [u.components[0] * t / n, u.components[1] * t / n]))?;
            let measured = space.distance(a, &q)?;
            let predicted = d0 - t * angle.cos();
            Ok(FirstVariationRow { t, measured, predicted, error: measured - predicted })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstVariationCase {
    pub a: Point,
    pub start: Point,
    pub end: Point,
    pub rows: Vec<FirstVariationRow>,
    /// `(error/t)` at the smallest `t` over its leading-order extrapolation
    /// from the largest `t`, the extrapolation padded by a rounding floor.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstVariationReport {
    pub space: Space,
    pub region: Region,
    pub seed: u64,
    pub t_values: Vec<f64>,
    pub cases: Vec<FirstVariationCase>,
    pub worst_ratio: f64,
    /// Every ratio is at most 10.
    pub passed: bool,
}

/// Ratio test for `error(t) = o(t)`: with `error ≈ C t²`, the value of
/// `error/t` at the largest `t` predicts the value at the smallest. A
/// floor of `64 ε (1 + d₀) / t` absorbs rounding in the distances.
pub fn ratio_test(rows: &[FirstVariationRow], d0: f64) -> f64 {
    let (Some(big), Some(small)) = (rows.iter().max_by(|a, b| a.t.total_cmp(&b.t)), rows.iter().min_by(|a, b| a.t.total_cmp(&b.t))) else {
        return 0.0;
    };
    let predicted = big.error.abs() / big.t * (small.t / big.t);
    let floor = 64.0 * f64::EPSILON * (1.0 + d0) / small.t;
    (small.error.abs() / small.t) / (predicted + floor)
}

/// Runs [`check_first_variation`] on `n` seeded configurations `(a, x, y)`
/// sampled from `region`, following the minimal geodesic from `x` to `y`.
pub fn check_first_variation_sampled(
    space: &Space,
    region: &Region,
    n: usize,
    seed: u64,
    t_values: &[f64],
) -> Result<FirstVariationReport> {
    region.validate(space)?;
    if t_values.is_empty() || t_values.iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::Validation("t values must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(n);
    let mut attempts = 0;
    while cases.len() < n {
        attempts += 1;
        if attempts > 100 * (n + 1) {
            return Err(Error::Degenerate("region too small for first-variation sampling".into()));
        }
        let pts = region.sample_with(space, 3, &mut rng)?;
        let (a, x, y) = (pts[0], pts[1], pts[2]);
        if !space.regular(&x) || space.dist(&x, &y) == 0.0 {
            continue;
        }
        let d0 = space.dist(&a, &x);
        if d0 < 1e-3 {
            continue;
        }
        let g = space.geodesic_between(&x, &y)?;
        let rows = check_first_variation(space, &a, &g, t_values)?;
        let ratio = ratio_test(&rows, d0);
        cases.push(FirstVariationCase { a, start: x, end: y, rows, ratio });
    }
    let worst_ratio = cases.iter().map(|c| c.ratio).fold(0.0, f64::max);
    Ok(FirstVariationReport {
        space: *space,
        region: *region,
        seed,
        t_values: t_values.to_vec(),
        cases,
        worst_ratio,
        passed: worst_ratio <= 10.0,
    })
}

/// Whether `pairs` is an `(n, ε)`-strainer at `p`, comparing against the
/// model surface of curvature `space.curvature_bound()`.
pub fn is_strained(space: &Space, p: &Point, pairs: &[(Point, Point)], epsilon: f64) -> Result<bool> {
    let k = space.curvature_bound();
    let angle = |x: &Point, y: &Point| comparison_angle(space, p, x, y, k).map(|c| c.angle);
    for (i, (xi, yi)) in pairs.iter().enumerate() {
        if angle(xi, yi)? <= PI - epsilon {
            return Ok(false);
        }
        for (j, (xj, yj)) in pairs.iter().enumerate() {
            if i == j {
                continue;
            }
            let right = FRAC_PI_2 - 10.0 * epsilon;
            if angle(xi, xj)? <= right || angle(xi, yj)? <= right || angle(yi, yj)? <= right {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
