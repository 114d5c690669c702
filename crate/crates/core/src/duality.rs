//! Discrete probability measures, the c-transform over finite sets and the
//! Kantorovich dual objective.

use serde::{Deserialize, Serialize};

use crate::costs::{CostMatrix, CostSpec};
use crate::error::{invalid, Error, Result};
use crate::spaces::{Point, Space};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

/// Finitely supported probability measure. Weights are positive and sum to 1
/// within `WEIGHT_SUM_TOL`; atoms are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRepr {
    atoms: Vec<Atom>,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = Error;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        DiscreteMeasure::new(r.atoms)
    }
}

impl From<DiscreteMeasure> for MeasureRepr {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureRepr { atoms: m.atoms }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("empty measure");
        }
        if let Some(a) = atoms.iter().find(|a| !(a.weight > 0.0 && a.weight.is_finite())) {
            return invalid(format!("atom weight {} is not positive", a.weight));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        let mut keys: Vec<(Vec<u64>, usize)> =
            atoms.iter().enumerate().map(|(i, a)| (a.point.coords().iter().map(|c| (c + 0.0).to_bits()).collect(), i)).collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0) {
            return invalid(format!("atoms {} and {} coincide", w[0].1, w[1].1));
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// Equal weights `1/n` on `points`.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        Self::new(points.into_iter().map(|point| Atom { point, weight: w }).collect())
    }

    /// Canonicalises every atom for `space`; fails on points outside it or
    /// on atoms that coincide there.
    pub fn for_space(&self, space: &Space) -> Result<Self> {
        let atoms =
            self.atoms.iter().map(|a| Ok(Atom { point: space.canonical(&a.point)?, weight: a.weight })).collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.atoms.iter().map(|a| a.point).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }
}

/// Dual potentials: `phi` on source atoms, `phi_c` on target atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialPair {
    pub phi: Vec<f64>,
    pub phi_c: Vec<f64>,
}

impl PotentialPair {
    /// `max(0, max_ij phi[i] + phi_c[j] − c[i][j])`.
    pub fn max_violation(&self, cost: &CostMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (i, p) in self.phi.iter().enumerate() {
            for (q, c) in self.phi_c.iter().zip(cost.row(i)) {
                worst = worst.max(p + q - c);
            }
        }
        worst
    }

    pub fn is_feasible(&self, cost: &CostMatrix) -> bool {
        self.phi.len() == cost.rows() && self.phi_c.len() == cost.cols() && self.max_violation(cost) <= FEASIBILITY_TOL
    }

    /// Adds `a` to `phi` and subtracts it from `phi_c`.
    pub fn shifted(&self, a: f64) -> Self {
        PotentialPair { phi: self.phi.iter().map(|p| p + a).collect(), phi_c: self.phi_c.iter().map(|q| q - a).collect() }
    }
}

/// `φᶜ` on a finite set together with the indices attaining each minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub values: Vec<f64>,
    /// For each output, every input index within the tie tolerance of the
    /// minimum; the first entry is the smallest-index exact minimiser.
    pub ties: Vec<Vec<usize>>,
}

/// `out[j] = min_i cost(i, j) − values[i]`, with `cost` given as a closure
/// over `(input index, output index)`.
fn transform_by(n_in: usize, n_out: usize, values: &[f64], tie_tol: f64, cost: impl Fn(usize, usize) -> f64) -> Result<Transform> {
    if n_in == 0 {
        return Err(Error::Domain("c-transform over an empty set".into()));
    }
    if values.len() != n_in {
        return invalid(format!("{} values for {n_in} points", values.len()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return invalid(format!("potential value {v} is not finite"));
    }
    let mut out = Vec::with_capacity(n_out);
    let mut ties = Vec::with_capacity(n_out);
    for j in 0..n_out {
        let row: Vec<f64> = (0..n_in).map(|i| cost(i, j) - values[i]).collect();
        let (best, min) = row.iter().enumerate().fold((0, f64::INFINITY), |(b, m), (i, &v)| if v < m { (i, v) } else { (b, m) });
        let mut tie = vec![best];
        tie.extend((0..n_in).filter(|&i| i != best && row[i] <= min + tie_tol));
        out.push(min);
        ties.push(tie);
    }
    Ok(Transform { values: out, ties })
}

/// Transform of source potentials to the targets (columns of `cost`).
pub fn transform_to_targets(cost: &CostMatrix, phi: &[f64], tie_tol: f64) -> Result<Transform> {
    transform_by(cost.rows(), cost.cols(), phi, tie_tol, |i, j| cost.get(i, j))
}

/// Transform of target potentials back to the sources (rows of `cost`).
pub fn transform_to_sources(cost: &CostMatrix, phi_c: &[f64], tie_tol: f64) -> Result<Transform> {
    transform_by(cost.cols(), cost.rows(), phi_c, tie_tol, |j, i| cost.get(i, j))
}

/// `φᶜ(b) = min_{a ∈ from} c(a, b) − φ(a)` for every `b ∈ to`.
pub fn c_transform(cost: &CostSpec, space: &Space, values: &[f64], from: &[Point], to: &[Point]) -> Result<Vec<f64>> {
    c_transform_with_ties(cost, space, values, from, to, 0.0).map(|t| t.values)
}

pub fn c_transform_with_ties(
    cost: &CostSpec,
    space: &Space,
    values: &[f64],
    from: &[Point],
    to: &[Point],
    tie_tol: f64,
) -> Result<Transform> {
    if from.is_empty() {
        return Err(Error::Domain("c-transform over an empty set".into()));
    }
    let c = cost.matrix(space, from, to)?;
    transform_to_targets(&c, values, tie_tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityCheck {
    pub concave: bool,
    pub max_deviation: f64,
}

/// Compares `φ` on `on` with `φᶜᶜ`, the double transform through `against`.
pub fn is_c_concave(cost: &CostSpec, space: &Space, values: &[f64], on: &[Point], against: &[Point], tol: f64) -> Result<ConcavityCheck> {
    let c = cost.matrix(space, on, against)?;
    let once = transform_to_targets(&c, values, 0.0)?;
    let twice = transform_to_sources(&c, &once.values, 0.0)?;
    let max_deviation = values.iter().zip(&twice.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ConcavityCheck { concave: max_deviation <= tol, max_deviation })
}

/// `Σ phi[i] w⁰ᵢ + Σ phi_c[j] w¹ⱼ`.
pub fn dual_objective(pair: &PotentialPair, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<f64> {
    if pair.phi.len() != mu0.len() || pair.phi_c.len() != mu1.len() {
        return invalid(format!(
            "potentials of length {}/{} for measures with {}/{} atoms",
            pair.phi.len(),
            pair.phi_c.len(),
            mu0.len(),
            mu1.len()
        ));
    }
    Ok(weighted_sum(&pair.phi, mu0) + weighted_sum(&pair.phi_c, mu1))
}

fn weighted_sum(v: &[f64], mu: &DiscreteMeasure) -> f64 {
    v.iter().zip(mu.atoms()).map(|(p, a)| p * a.weight).sum()
}
