//! Semi-discrete verification of the Monge map `F(x) = exp_x(−∇ψ(x))`.
//!
//! For target atoms `yⱼ` with dual values `φᶜⱼ`, `ψ(x) = minⱼ c(x, yⱼ) − φᶜⱼ`.
//! The gradient is taken by central differences along the frame geodesics
//! at `x`; for `c = h(d)` the map shoots a distance `(h')⁻¹(|∇ψ|)` along
//! `−∇ψ`, and `F(x) = x` when the gradient vanishes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::costs::{CostMatrix, CostSpec};
use crate::duality::DiscreteMeasure;
use crate::error::{invalid, Error, Result};
use crate::solver::{center_potentials, solve_with, PivotRule, SolveOptions, TransportPlan};
use crate::spaces::{Point, Region, Space, TangentVector};

/// Two targets within this of the minimum make `x` a tie point.
pub const TIE_TOL: f64 = 1e-9;
pub const PLANE_TOL: f64 = 1e-6;
pub const CURVED_TOL: f64 = 1e-4;

pub fn default_tol(space: &Space) -> f64 {
    match space {
        Space::Plane => PLANE_TOL,
        _ => CURVED_TOL,
    }
}

/// `1e-5` times the largest pairwise distance among `points`.
pub fn default_fd_step(space: &Space, points: &[Point]) -> f64 {
    let diam = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| points[i + 1..].iter().map(|q| space.dist(p, q)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    1e-5 * if diam > 0.0 { diam } else { 1.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiDiscretePotential {
    space: Space,
    cost: CostSpec,
    targets: Vec<Point>,
    phi_c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiValue {
    pub value: f64,
    pub argmin: usize,
    pub tie: bool,
}

impl SemiDiscretePotential {
    pub fn new(space: Space, cost: CostSpec, targets: Vec<Point>, phi_c: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return invalid("potential without targets");
        }
        if targets.len() != phi_c.len() {
            return invalid(format!("{} dual values for {} targets", phi_c.len(), targets.len()));
        }
        if let Some(v) = phi_c.iter().find(|v| !v.is_finite()) {
            return invalid(format!("dual value {v} is not finite"));
        }
        let targets = targets.iter().map(|y| space.canonical(y)).collect::<Result<Vec<_>>>()?;
        Ok(SemiDiscretePotential { space, cost, targets, phi_c })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    pub fn phi_c(&self) -> &[f64] {
        &self.phi_c
    }

    fn value_canonical(&self, x: &Point) -> PsiValue {
        let vals: Vec<f64> = self.targets.iter().zip(&self.phi_c).map(|(y, q)| self.cost.h(self.space.dist(x, y)) - q).collect();
        let (argmin, value) = vals.iter().enumerate().fold((0, f64::INFINITY), |(b, m), (j, &v)| if v < m { (j, v) } else { (b, m) });
        let tie = vals.iter().enumerate().any(|(j, &v)| j != argmin && v <= value + TIE_TOL);
        PsiValue { value, argmin, tie }
    }
}

pub fn eval_psi(pot: &SemiDiscretePotential, x: &Point) -> Result<PsiValue> {
    let x = pot.space.canonical(x)?;
    Ok(pot.value_canonical(&x))
}

/// Central-difference gradient in the tangent frame at `x`.
///
/// Fails with `NotDifferentiable` at singular points, tie points, when the
/// stencil crosses into another cell or the cut locus of the active target,
/// or when the chart at `x` is smaller than the step.
pub fn grad_psi(pot: &SemiDiscretePotential, x: &Point, fd_step: f64) -> Result<TangentVector> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return invalid(format!("finite-difference step {fd_step} must be positive"));
    }
    let space = pot.space;
    let x = space.canonical(x)?;
    if !space.regular(&x) {
        return Err(Error::NotDifferentiable("singular point".into()));
    }
    let centre = pot.value_canonical(&x);
    if centre.tie {
        return Err(Error::NotDifferentiable("tie between targets".into()));
    }
    let limit = space.chart_radius(&x)?;
    if fd_step >= limit {
        return Err(Error::NotDifferentiable(format!("step {fd_step} exceeds the chart radius {limit}")));
    }
    if space.cut_margin(&x, &pot.targets[centre.argmin]) <= 2.0 * fd_step {
        return Err(Error::NotDifferentiable("stencil meets the cut locus of the active target".into()));
    }
    let chart = space.local_chart(&x, (2.0 * fd_step).min(0.5 * (fd_step + limit)))?;
    let mut g = [0.0; 2];
    for (k, gk) in g.iter_mut().enumerate() {
        let mut e = [0.0; 2];
        e[k] = fd_step;
        let plus = pot.value_canonical(&chart.inverse(e)?);
        let minus = pot.value_canonical(&chart.inverse([-e[0], -e[1]])?);
        if plus.argmin != centre.argmin || minus.argmin != centre.argmin || plus.tie || minus.tie {
            return Err(Error::NotDifferentiable("stencil leaves the cell".into()));
        }
        *gk = (plus.value - minus.value) / (2.0 * fd_step);
    }
    Ok(TangentVector::new(x, g))
}

/// `exp_x(−((h')⁻¹(|∇ψ|) / |∇ψ|) ∇ψ)`, or `x` when `|∇ψ| ≤ fd_step²`.
pub fn monge_point(pot: &SemiDiscretePotential, x: &Point, fd_step: f64) -> Result<Point> {
    let g = grad_psi(pot, x, fd_step)?;
    shoot(pot, &g, fd_step)
}

fn shoot(pot: &SemiDiscretePotential, g: &TangentVector, fd_step: f64) -> Result<Point> {
    let norm = g.norm();
    if norm <= fd_step * fd_step {
        return Ok(g.base);
    }
    let len = pot.cost.h_prime_plus_inverse(norm);
    pot.space.exp_map(&g.scaled(-len / norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomStatus {
    Verified,
    Split,
    Singular,
    Tie,
    NotDifferentiable,
    /// The plan's target is not the minimiser of ψ.
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomRecord {
    pub index: usize,
    pub x: Point,
    pub status: AtomStatus,
    pub assigned: Option<usize>,
    pub grad_norm: Option<f64>,
    /// `d(x, F(x))`.
    pub shoot_distance: Option<f64>,
    /// `d(x, assigned target)`.
    pub target_distance: Option<f64>,
    pub formula_residual: Option<f64>,
    pub norm_residual: Option<f64>,
    /// `F(x) = x` because the gradient vanished.
    pub stationary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapConfig {
    pub space: Space,
    pub cost: CostSpec,
    pub n_source: usize,
    pub n_target: usize,
    pub fd_step: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapVerificationReport {
    pub config: MapConfig,
    pub n_atoms: usize,
    pub n_split: usize,
    pub verified: usize,
    /// Singular, tie and non-differentiable atoms.
    pub skipped: usize,
    pub skipped_singular: usize,
    pub skipped_tie: usize,
    pub skipped_not_differentiable: usize,
    pub mismatches: usize,
    /// Verified atoms where the `F(x) = x` branch was taken.
    pub n_stationary: usize,
    pub max_formula_residual: f64,
    pub max_norm_residual: f64,
    /// Largest `|ψ(x) + φᶜ_assigned − c(x, assigned)|` over verified atoms.
    pub max_equality_residual: f64,
    pub cost_total: f64,
    pub passed: bool,
    #[serde(skip)]
    pub atoms: Vec<AtomRecord>,
}

impl MapVerificationReport {
    pub fn split_fraction(&self) -> f64 {
        self.n_split as f64 / self.n_atoms as f64
    }
}

/// Solves `mu0 → mu1` and builds the potential from the centred target duals.
pub fn solve_potential(
    space: &Space,
    cost: &CostSpec,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
) -> Result<(CostMatrix, TransportPlan, SemiDiscretePotential)> {
    solve_potential_with(space, cost, mu0, mu1, &SolveOptions::default(), None)
}

fn solve_potential_with(
    space: &Space,
    cost: &CostSpec,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    opts: &SolveOptions,
    cost_override: Option<&CostMatrix>,
) -> Result<(CostMatrix, TransportPlan, SemiDiscretePotential)> {
    let c = cost.matrix(space, &mu0.points(), &mu1.points())?;
    let solved_on = cost_override.unwrap_or(&c);
    let s = solve_with(solved_on, &mu0.weights(), &mu1.weights(), opts)?;
    let pair = center_potentials(solved_on, &s.plan, &s.potentials);
    let pot = SemiDiscretePotential::new(*space, *cost, mu1.points(), pair.phi_c)?;
    Ok((c, s.plan, pot))
}

fn verify_atom(pot: &SemiDiscretePotential, index: usize, x: Point, assigned: &[usize], fd_step: f64) -> AtomRecord {
    let mut rec = AtomRecord {
        index,
        x,
        status: AtomStatus::Split,
        assigned: None,
        grad_norm: None,
        shoot_distance: None,
        target_distance: None,
        formula_residual: None,
        norm_residual: None,
        stationary: false,
    };
    let &[j] = assigned else { return rec };
    rec.assigned = Some(j);
    let space = pot.space;
    if !space.regular(&x) {
        rec.status = AtomStatus::Singular;
        return rec;
    }
    let psi = pot.value_canonical(&x);
    if psi.tie {
        rec.status = AtomStatus::Tie;
        return rec;
    }
    if psi.argmin != j {
        rec.status = AtomStatus::Mismatch;
        return rec;
    }
    let g = match grad_psi(pot, &x, fd_step) {
        Ok(g) => g,
        Err(_) => {
            rec.status = AtomStatus::NotDifferentiable;
            return rec;
        }
    };
    let Ok(fx) = shoot(pot, &g, fd_step) else {
        rec.status = AtomStatus::NotDifferentiable;
        return rec;
    };
    let y = pot.targets[j];
    let d = space.dist(&x, &y);
    let shoot_len = pot.cost.h_prime_plus_inverse(g.norm());
    rec.status = AtomStatus::Verified;
    rec.stationary = g.norm() <= fd_step * fd_step;
    rec.grad_norm = Some(g.norm());
    rec.shoot_distance = Some(space.dist(&x, &fx));
    rec.target_distance = Some(d);
    rec.formula_residual = Some(space.dist(&fx, &y));
    rec.norm_residual = Some((shoot_len - d).abs());
    rec
}

/// Solves the discrete problem and checks, at every unsplit regular non-tie
/// source atom, that the plan's target is the minimiser of ψ, that
/// `exp_x(−∇ψ)` lands on it and that the shooting length equals the
/// distance to it.
pub fn verify_graph_and_formula(
    space: &Space,
    cost: &CostSpec,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    fd_step: f64,
    tol: f64,
) -> Result<MapVerificationReport> {
    let mu0 = mu0.for_space(space)?;
    let mu1 = mu1.for_space(space)?;
    let (c, plan, pot) = solve_potential(space, cost, &mu0, &mu1)?;
    let by_source = plan.targets_by_source(mu0.len());
    let atoms: Vec<AtomRecord> =
        mu0.points().into_par_iter().enumerate().map(|(i, x)| verify_atom(&pot, i, x, &by_source[i], fd_step)).collect();

    let count = |s: AtomStatus| atoms.iter().filter(|a| a.status == s).count();
    let max_of = |f: fn(&AtomRecord) -> Option<f64>| atoms.iter().filter_map(f).fold(0.0, f64::max);
    let max_equality_residual = atoms
        .iter()
        .filter(|a| a.status == AtomStatus::Verified)
        .map(|a| {
            let j = a.assigned.expect("verified atoms are assigned");
            let psi = pot.value_canonical(&a.x).value;
            (psi + pot.phi_c[j] - c.get(a.index, j)).abs()
        })
        .fold(0.0, f64::max);
    let (singular, tie, nondiff) = (count(AtomStatus::Singular), count(AtomStatus::Tie), count(AtomStatus::NotDifferentiable));
    let max_formula_residual = max_of(|a| a.formula_residual);
    let max_norm_residual = max_of(|a| a.norm_residual);
    let mismatches = count(AtomStatus::Mismatch);
    Ok(MapVerificationReport {
        config: MapConfig { space: *space, cost: *cost, n_source: mu0.len(), n_target: mu1.len(), fd_step, tol },
        n_atoms: atoms.len(),
        n_split: count(AtomStatus::Split),
        verified: count(AtomStatus::Verified),
        skipped: singular + tie + nondiff,
        skipped_singular: singular,
        skipped_tie: tie,
        skipped_not_differentiable: nondiff,
        mismatches,
        n_stationary: atoms.iter().filter(|a| a.stationary).count(),
        max_formula_residual,
        max_norm_residual,
        max_equality_residual,
        cost_total: plan.cost_total(),
        passed: mismatches == 0 && max_formula_residual <= tol && max_norm_residual <= tol && max_equality_residual <= 1e-9,
        atoms,
    })
}

/// Runs [`verify_graph_and_formula`] on uniform samples of `region` of each
/// size in `sizes`, all drawn from `seed`.
#[allow(clippy::too_many_arguments)]
pub fn verify_ladder(
    space: &Space,
    cost: &CostSpec,
    region: &Region,
    mu1: &DiscreteMeasure,
    sizes: &[usize],
    seed: u64,
    fd_step: Option<f64>,
    tol: f64,
) -> Result<Vec<MapVerificationReport>> {
    sizes
        .iter()
        .map(|&n| {
            let mu0 = DiscreteMeasure::uniform(space.sample_region(region, n, seed)?)?;
            let h = fd_step.unwrap_or_else(|| {
                let mut all = mu0.points();
                all.extend(mu1.points());
                default_fd_step(space, &all)
            });
            verify_graph_and_formula(space, cost, &mu0, mu1, h, tol)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessConfig {
    pub space: Space,
    pub cost: CostSpec,
    pub n_source: usize,
    pub n_target: usize,
    pub perturbation: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub config: UniquenessConfig,
    /// Pivot rules times `1 + trials` cost variants.
    pub runs: usize,
    /// Atoms split in some run, singular, or within the tie band of ψ.
    pub flagged: usize,
    pub compared: usize,
    pub disagreements: usize,
    pub flagged_disagreements: usize,
    pub disagreeing_atoms: Vec<usize>,
    pub passed: bool,
}

/// Solves the instance under every pivot rule, each with the exact costs
/// and with `trials` seeded relative perturbations of size `≤ perturbation`,
/// and compares the target assigned to each atom across all runs.
pub fn verify_uniqueness(
    space: &Space,
    cost: &CostSpec,
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    perturbation: f64,
    trials: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    if !(0.0..=1e-9).contains(&perturbation) {
        return invalid(format!("perturbation scale {perturbation} outside [0, 1e-9]"));
    }
    let mu0 = mu0.for_space(space)?;
    let mu1 = mu1.for_space(space)?;
    let n = mu0.len();
    let base = cost.matrix(space, &mu0.points(), &mu1.points())?;
    let scale = perturbation * (1.0 + base.max_abs());
    let mut variants = vec![None];
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64 + 1);
        let noise: Vec<f64> = (0..base.rows() * base.cols()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        variants.push(Some(base.map(|i, j, c| c + scale * noise[i * base.cols() + j])));
    }

    let mut assignments: Vec<Vec<Option<usize>>> = Vec::new();
    let mut flagged = vec![false; n];
    for rule in PivotRule::ALL {
        for v in &variants {
            let opts = SolveOptions { pivot: rule, ..Default::default() };
            let (_, plan, pot) = solve_potential_with(space, cost, &mu0, &mu1, &opts, v.as_ref())?;
            let rows = plan.targets_by_source(n);
            let run: Vec<Option<usize>> = rows.iter().map(|r| (r.len() == 1).then(|| r[0])).collect();
            for (i, x) in mu0.points().iter().enumerate() {
                if run[i].is_none() || !space.regular(x) || near_tie(&pot, x, 4.0 * scale) {
                    flagged[i] = true;
                }
            }
            assignments.push(run);
        }
    }
    let mut disagreeing_atoms = Vec::new();
    let mut flagged_disagreements = 0;
    for i in 0..n {
        let seen: Vec<usize> = assignments.iter().filter_map(|run| run[i]).collect();
        if seen.windows(2).any(|w| w[0] != w[1]) {
            if flagged[i] {
                flagged_disagreements += 1;
            } else {
                disagreeing_atoms.push(i);
            }
        }
    }
    let n_flagged = flagged.iter().filter(|&&f| f).count();
    Ok(UniquenessReport {
        config: UniquenessConfig { space: *space, cost: *cost, n_source: n, n_target: mu1.len(), perturbation, trials, seed },
        runs: assignments.len(),
        flagged: n_flagged,
        compared: n - n_flagged,
        disagreements: disagreeing_atoms.len(),
        flagged_disagreements,
        passed: disagreeing_atoms.is_empty(),
        disagreeing_atoms,
    })
}

fn near_tie(pot: &SemiDiscretePotential, x: &Point, band: f64) -> bool {
    let mut vals: Vec<f64> = pot.targets.iter().zip(&pot.phi_c).map(|(y, q)| pot.cost.h(pot.space.dist(x, y)) - q).collect();
    vals.sort_by(f64::total_cmp);
    vals.len() > 1 && vals[1] - vals[0] <= TIE_TOL.max(band)
}
