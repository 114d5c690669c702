//! Exact discrete Kantorovich solver with dual certificates.

mod center;
mod oracle;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::costs::CostMatrix;
use crate::duality::{dual_objective, DiscreteMeasure, PotentialPair, FEASIBILITY_TOL, WEIGHT_SUM_TOL};
use crate::error::{invalid, Error, Result};

pub use center::{center_potentials, min_off_support_slack};
pub use oracle::{oracle_bruteforce, MAX_BASIS_CELLS, MAX_PERMUTATION_SIZE};

/// Masses at or below this are dropped from the returned plan.
pub const MASS_FLOOR: f64 = 1e-14;
pub const MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotRule {
    /// First improving cell in row-major order.
    #[default]
    Bland,
    /// Most negative reduced cost.
    Dantzig,
    /// Last improving cell in row-major order.
    ReverseBland,
}

impl PivotRule {
    pub const ALL: [PivotRule; 3] = [PivotRule::Bland, PivotRule::Dantzig, PivotRule::ReverseBland];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub pivot: PivotRule,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { pivot: PivotRule::Bland, max_iterations: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

impl From<(usize, usize, f64)> for PlanEntry {
    fn from((source, target, mass): (usize, usize, f64)) -> Self {
        PlanEntry { source, target, mass }
    }
}

impl From<PlanEntry> for (usize, usize, f64) {
    fn from(e: PlanEntry) -> Self {
        (e.source, e.target, e.mass)
    }
}

/// Sparse coupling, entries sorted by `(source, target)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    entries: Vec<PlanEntry>,
    cost_total: f64,
}

impl TransportPlan {
    /// Builds a plan from explicit entries, pricing it with `cost`.
    pub fn new(mut entries: Vec<PlanEntry>, cost: &CostMatrix) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.source >= cost.rows() || e.target >= cost.cols()) {
            return invalid(format!("plan entry ({}, {}) outside a {}x{} problem", e.source, e.target, cost.rows(), cost.cols()));
        }
        if let Some(e) = entries.iter().find(|e| e.mass.is_nan() || e.mass <= 0.0) {
            return invalid(format!("plan mass {} is not positive", e.mass));
        }
        entries.sort_by_key(|e| (e.source, e.target));
        if entries.windows(2).any(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target)) {
            return invalid("repeated plan entry");
        }
        let cost_total = entries.iter().map(|e| e.mass * cost.get(e.source, e.target)).sum();
        Ok(TransportPlan { entries, cost_total })
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn cost_total(&self) -> f64 {
        self.cost_total
    }

    pub fn row_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.entries {
            s[e.source] += e.mass;
        }
        s
    }

    pub fn col_sums(&self, m: usize) -> Vec<f64> {
        let mut s = vec![0.0; m];
        for e in &self.entries {
            s[e.target] += e.mass;
        }
        s
    }

    /// Largest deviation of the marginals from `w0`, `w1`.
    pub fn marginal_error(&self, w0: &[f64], w1: &[f64]) -> f64 {
        let dev = |s: Vec<f64>, w: &[f64]| s.iter().zip(w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        dev(self.row_sums(w0.len()), w0).max(dev(self.col_sums(w1.len()), w1))
    }

    /// Targets receiving mass from each source, in increasing order.
    pub fn targets_by_source(&self, n: usize) -> Vec<Vec<usize>> {
        let mut t = vec![Vec::new(); n];
        for e in &self.entries {
            t[e.source].push(e.target);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: TransportPlan,
    pub potentials: PotentialPair,
    pub iterations: usize,
}

pub(crate) fn validate(cost: &CostMatrix, w0: &[f64], w1: &[f64]) -> Result<()> {
    if cost.rows() == 0 || cost.cols() == 0 {
        return invalid("empty transport problem");
    }
    if w0.len() != cost.rows() || w1.len() != cost.cols() {
        return invalid(format!("weights of length {}/{} for a {}x{} cost matrix", w0.len(), w1.len(), cost.rows(), cost.cols()));
    }
    for (name, w) in [("source", w0), ("target", w1)] {
        if let Some(x) = w.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return invalid(format!("{name} weight {x} is not positive"));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return invalid(format!("{name} weights sum to {total}, not 1"));
        }
    }
    Ok(())
}

/// Optimal plan and potentials with the default (Bland) pivot rule.
pub fn solve_exact(cost: &CostMatrix, w0: &[f64], w1: &[f64]) -> Result<(TransportPlan, PotentialPair)> {
    solve_with(cost, w0, w1, &SolveOptions::default()).map(|s| (s.plan, s.potentials))
}

pub fn solve_with(cost: &CostMatrix, w0: &[f64], w1: &[f64], opts: &SolveOptions) -> Result<Solution> {
    validate(cost, w0, w1)?;
    let n = cost.rows();
    let mut eps = 1e-11 / (n + 1) as f64;
    for _ in 0..3 {
        let basis = simplex::run(cost, w0, w1, opts.pivot, eps, opts.max_iterations)?;
        let (flow, pot) = simplex::evaluate(cost, w0, w1, &basis.cells);
        // the perturbed basis is feasible for the true weights up to rounding
        if flow.iter().any(|&x| x < -1e-12) {
            eps *= 1e-2;
            continue;
        }
        let entries = basis
            .cells
            .iter()
            .zip(&flow)
            .filter(|(_, &x)| x > MASS_FLOOR)
            .map(|(&(i, j), &mass)| PlanEntry { source: i, target: j, mass })
            .collect();
        let plan = TransportPlan::new(entries, cost)?;
        let lo = pot[..n].iter().copied().fold(f64::INFINITY, f64::min);
        let potentials = PotentialPair { phi: pot[..n].iter().map(|u| u - lo).collect(), phi_c: pot[n..].iter().map(|v| v + lo).collect() };
        debug_assert!(potentials.max_violation(cost) <= FEASIBILITY_TOL);
        return Ok(Solution { plan, potentials, iterations: basis.iterations });
    }
    Err(Error::Degenerate("weights too close to a degenerate basis for the perturbation".into()))
}

/// `cost_total − dual_objective`; nonnegative for feasible inputs.
pub fn duality_gap(plan: &TransportPlan, pair: &PotentialPair, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<f64> {
    Ok(plan.cost_total() - dual_objective(pair, mu0, mu1)?)
}

/// Largest `|φᵢ + φᶜⱼ − cᵢⱼ|` over the support of `plan`.
pub fn slackness_residual(cost: &CostMatrix, plan: &TransportPlan, pair: &PotentialPair) -> f64 {
    plan.entries().iter().map(|e| (pair.phi[e.source] + pair.phi_c[e.target] - cost.get(e.source, e.target)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostSpec;
    use crate::spaces::{Point, Space};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::planar(x, 0.0)).collect()
    }

    #[test]
    fn identity_instance() {
        let pts = line(&[0.0, 0.3, 1.0, 2.0]);
        let c = CostSpec::Quadratic.matrix(&Space::Plane, &pts, &pts).unwrap();
        let w = [0.25; 4];
        let (plan, pair) = solve_exact(&c, &w, &w).unwrap();
        assert_eq!(plan.cost_total(), 0.0);
        assert!(plan.entries().iter().all(|e| e.source == e.target));
        let mu = DiscreteMeasure::uniform(pts).unwrap();
        assert!(duality_gap(&plan, &pair, &mu, &mu).unwrap().abs() <= 1e-9);
        let zero = PotentialPair { phi: vec![0.0; 4], phi_c: vec![0.0; 4] };
        assert_eq!(duality_gap(&plan, &zero, &mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_line() {
        let (xs, ys) = (line(&[0.0, 1.0]), line(&[1.0, 2.0]));
        let c = CostSpec::Quadratic.matrix(&Space::Plane, &xs, &ys).unwrap();
        let h = [0.5, 0.5];
        let (plan, pair) = solve_exact(&c, &h, &h).unwrap();
        assert!((plan.cost_total() - 0.5).abs() < 1e-15);
        let monotone: Vec<_> = plan.entries().iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(monotone, vec![(0, 0), (1, 1)]);
        let (m0, m1) = (DiscreteMeasure::uniform(xs).unwrap(), DiscreteMeasure::uniform(ys).unwrap());
        assert!(duality_gap(&plan, &pair, &m0, &m1).unwrap().abs() <= 1e-12);

        // anti-monotone: 0 → 2 costs 2²/2, 1 → 1 costs 0
        let swapped = TransportPlan::new(vec![(0, 1, 0.5).into(), (1, 0, 0.5).into()], &c).unwrap();
        assert!((swapped.cost_total() - 1.0).abs() < 1e-15);
        let zero = PotentialPair { phi: vec![0.0; 2], phi_c: vec![0.0; 2] };
        assert!((duality_gap(&swapped, &zero, &m0, &m1).unwrap() - 1.0).abs() < 1e-15);
        assert!(duality_gap(&swapped, &pair, &m0, &m1).unwrap() > 0.49);
    }

    #[test]
    fn validation() {
        let c = CostMatrix::new(2, 2, vec![0.0; 4]).unwrap();
        assert!(solve_exact(&c, &[0.5, 0.5], &[0.5, 0.6]).is_err());
        assert!(solve_exact(&c, &[1.0, 0.0], &[0.5, 0.5]).is_err());
        assert!(solve_exact(&c, &[1.0], &[0.5, 0.5]).is_err());
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, uniform: bool) -> (CostMatrix, Vec<f64>, Vec<f64>) {
        let c = CostMatrix::new(n, m, (0..n * m).map(|_| rng.random::<f64>()).collect()).unwrap();
        let mut w = |k: usize| -> Vec<f64> {
            if uniform {
                return vec![1.0 / k as f64; k];
            }
            let raw: Vec<f64> = (0..k).map(|_| 0.1 + rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        };
        let (w0, w1) = (w(n), w(m));
        (c, w0, w1)
    }

    #[test]
    fn matches_oracle_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..60 {
            let n = 1 + trial % 5;
            let (c, w0, w1) = random_instance(&mut rng, n, n, true);
            let (plan, _) = solve_exact(&c, &w0, &w1).unwrap();
            assert!((plan.cost_total() - oracle_bruteforce(&c, &w0, &w1).unwrap()).abs() <= 1e-12);
        }
        for (n, m) in [(2, 3), (3, 4), (2, 6), (4, 3), (1, 5)] {
            let (c, w0, w1) = random_instance(&mut rng, n, m, false);
            let (plan, _) = solve_exact(&c, &w0, &w1).unwrap();
            assert!((plan.cost_total() - oracle_bruteforce(&c, &w0, &w1).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn certificates_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..30 {
            let (n, m) = (1 + trial % 13, 1 + (trial * 7) % 17);
            let (c, w0, w1) = random_instance(&mut rng, n, m, trial % 2 == 0);
            for rule in PivotRule::ALL {
                let s = solve_with(&c, &w0, &w1, &SolveOptions { pivot: rule, ..Default::default() }).unwrap();
                assert!(s.plan.entries().len() < n + m);
                assert!(s.plan.marginal_error(&w0, &w1) <= MARGINAL_TOL);
                assert!(s.potentials.max_violation(&c) <= FEASIBILITY_TOL);
                assert!(slackness_residual(&c, &s.plan, &s.potentials) <= 1e-9);
                assert_eq!(s.potentials.phi.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
                let dual: f64 = s.potentials.phi.iter().zip(&w0).map(|(a, b)| a * b).sum::<f64>()
                    + s.potentials.phi_c.iter().zip(&w1).map(|(a, b)| a * b).sum::<f64>();
                assert!((s.plan.cost_total() - dual).abs() <= 1e-9 * (1.0 + s.plan.cost_total().abs()));
            }
        }
    }

    #[test]
    fn centering_removes_spurious_ties() {
        // translation of a 3x3 grid by (2, 0): the identity matching is optimal and unique
        let src: Vec<Point> = (0..9).map(|k| Point::planar((k % 3) as f64, (k / 3) as f64)).collect();
        let dst: Vec<Point> = src.iter().map(|p| Point::planar(p.coords()[0] + 2.0, p.coords()[1])).collect();
        let c = CostSpec::Quadratic.matrix(&Space::Plane, &src, &dst).unwrap();
        let w = [1.0 / 9.0; 9];
        let (plan, pair) = solve_exact(&c, &w, &w).unwrap();
        assert!(plan.entries().iter().all(|e| e.source == e.target));
        assert!(min_off_support_slack(&c, &plan, &pair) <= 1e-12);
        let centered = center_potentials(&c, &plan, &pair);
        assert!(min_off_support_slack(&c, &plan, &centered) > 0.1);
        assert!(slackness_residual(&c, &plan, &centered) <= 1e-12);
        assert!(centered.max_violation(&c) <= 1e-12);
    }

    #[test]
    fn plan_json_shape() {
        let c = CostMatrix::new(1, 1, vec![2.0]).unwrap();
        let p = TransportPlan::new(vec![(0, 0, 1.0).into()], &c).unwrap();
        assert_eq!(serde_json::to_string(&p.entries()).unwrap(), "[[0,0,1.0]]");
        assert!(TransportPlan::new(vec![(0, 1, 1.0).into()], &c).is_err());
    }
}
