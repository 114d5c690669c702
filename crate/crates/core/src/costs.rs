//! Costs of the form `c(x, y) = h(d(x, y))` for strictly convex,
//! nondecreasing `h`. Two families are supported: the quadratic cost
//! `h(t) = t²/2` and the power cost `h(t) = tᵖ/p` with `p > 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spaces::{Point, Space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostRepr", into = "CostRepr")]
pub enum CostSpec {
    Quadratic,
    Power { p: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CostRepr {
    Quadratic,
    Power { p: f64 },
}

impl TryFrom<CostRepr> for CostSpec {
    type Error = Error;

    fn try_from(repr: CostRepr) -> Result<Self> {
        match repr {
            CostRepr::Quadratic => Ok(CostSpec::Quadratic),
            CostRepr::Power { p } => CostSpec::power(p),
        }
    }
}

impl From<CostSpec> for CostRepr {
    fn from(spec: CostSpec) -> Self {
        match spec {
            CostSpec::Quadratic => CostRepr::Quadratic,
            CostSpec::Power { p } => CostRepr::Power { p },
        }
    }
}

impl CostSpec {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return invalid(format!("power cost exponent must exceed 1, got {p}"));
        }
        Ok(CostSpec::Power { p })
    }

    pub fn h(&self, t: f64) -> f64 {
        match *self {
            CostSpec::Quadratic => 0.5 * t * t,
            CostSpec::Power { p } => t.powf(p) / p,
        }
    }

    pub fn h_prime(&self, t: f64) -> f64 {
        match *self {
            CostSpec::Quadratic => t,
            CostSpec::Power { p } => t.powf(p - 1.0),
        }
    }

    /// Inverse of the right derivative `h'₊`, on `s ≥ 0`.
    pub fn h_prime_plus_inverse(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match *self {
            CostSpec::Quadratic => s,
            CostSpec::Power { p } => s.powf(1.0 / (p - 1.0)),
        }
    }

    pub fn cost(&self, space: &Space, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.h(space.distance(x, y)?))
    }

    pub fn matrix(&self, space: &Space, xs: &[Point], ys: &[Point]) -> Result<CostMatrix> {
        let xs = xs.iter().map(|p| space.canonical(p)).collect::<Result<Vec<_>>>()?;
        let ys = ys.iter().map(|p| space.canonical(p)).collect::<Result<Vec<_>>>()?;
        let data = xs.iter().flat_map(|x| ys.iter().map(move |y| self.h(space.dist(x, y)))).collect();
        CostMatrix::new(xs.len(), ys.len(), data)
    }
}

/// Dense row-major cost matrix with finite entries; rows index sources.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("{} entries for a {rows}x{cols} matrix", data.len()));
        }
        if let Some(bad) = data.iter().find(|c| !c.is_finite()) {
            return invalid(format!("cost entry {bad} is not finite"));
        }
        Ok(CostMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged cost matrix");
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        CostMatrix { data: self.data.iter().map(|c| c * s).collect(), ..*self }
    }

    pub fn transposed(&self) -> Self {
        let data = (0..self.cols).flat_map(|j| (0..self.rows).map(move |i| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        CostMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let data = (0..self.rows * self.cols).map(|k| f(k / self.cols, k % self.cols, self.data[k])).collect();
        CostMatrix { data, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn examples() {
        let x = Point::planar(0.0, 0.0);
        assert_eq!(CostSpec::Quadratic.cost(&Space::Plane, &x, &x).unwrap(), 0.0);
        assert_eq!(CostSpec::Quadratic.cost(&Space::Plane, &x, &Point::planar(3.0, 4.0)).unwrap(), 12.5);
        let p3 = CostSpec::power(3.0).unwrap();
        assert_abs_diff_eq!(p3.h(2.0), 8.0 / 3.0, epsilon = 1e-15);
        assert_eq!(CostSpec::Quadratic.h_prime_plus_inverse(0.7), 0.7);
        assert_abs_diff_eq!(p3.h_prime_plus_inverse(4.0), 2.0, epsilon = 1e-15);
        assert_eq!(p3.h_prime_plus_inverse(0.0), 0.0);
        assert_eq!(CostSpec::Quadratic.h_prime_plus_inverse(0.0), 0.0);
    }

    #[test]
    fn matrix_layout() {
        let xs = [Point::planar(0.0, 0.0), Point::planar(1.0, 0.0)];
        let ys = [Point::planar(1.0, 0.0), Point::planar(2.0, 0.0), Point::planar(0.0, 0.0)];
        let c = CostSpec::Quadratic.matrix(&Space::Plane, &xs, &ys).unwrap();
        assert_eq!((c.rows(), c.cols()), (2, 3));
        assert_eq!(c.row(0), &[0.5, 2.0, 0.0]);
        assert_eq!(c.transposed().get(2, 1), 0.5);
        assert!(CostMatrix::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(CostMatrix::from_rows(&[vec![0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn json_shapes() {
        assert_eq!(serde_json::from_str::<CostSpec>(r#"{"kind":"quadratic"}"#).unwrap(), CostSpec::Quadratic);
        assert_eq!(serde_json::from_str::<CostSpec>(r#"{"kind":"power","p":3.0}"#).unwrap(), CostSpec::Power { p: 3.0 });
        assert!(serde_json::from_str::<CostSpec>(r#"{"kind":"power","p":1.0}"#).is_err());
    }

    #[test]
    fn convexity_and_inverse_on_grid() {
        for spec in [CostSpec::Quadratic, CostSpec::power(1.5).unwrap(), CostSpec::power(3.0).unwrap()] {
            let grid: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
            for w in grid.windows(2) {
                assert!(spec.h_prime(w[1]) > spec.h_prime(w[0]));
                let mid = spec.h(0.5 * (w[0] + w[1]));
                assert!(mid < 0.5 * (spec.h(w[0]) + spec.h(w[1])));
            }
            for &t in &grid {
                assert_abs_diff_eq!(spec.h_prime_plus_inverse(spec.h_prime(t)), t, epsilon = 1e-10);
            }
        }
    }
}
