//! Re-centering of dual potentials inside the optimal face.
//!
//! A vertex solution with a degenerate basis pins potentials on zero-flow
//! cells, producing ties `φᵢ + φᶜⱼ = cᵢⱼ` off the support. Potentials are
//! only determined up to one additive shift per connected component of the
//! support graph; the shifts here maximise the smallest off-support slack.
//! With `δ_A` the shift of component `A`, a cell joining source component
//! `A` and target component `B` has slack `s⁰ − δ_A + δ_B`, so the best
//! common slack is the minimum cycle mean of the component graph (Karp) and
//! the shifts are shortest-path distances under weights `s⁰ − λ*`.

use crate::costs::CostMatrix;
use crate::duality::PotentialPair;

use super::TransportPlan;

fn components(n: usize, m: usize, plan: &TransportPlan) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..n + m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in plan.entries() {
        let (a, b) = (find(&mut parent, e.source), find(&mut parent, n + e.target));
        parent[a] = b;
    }
    let mut label = vec![usize::MAX; n + m];
    let mut count = 0;
    let comp: Vec<usize> = (0..n + m)
        .map(|v| {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            label[r]
        })
        .collect();
    (comp, count)
}

/// Minimum cycle mean of a dense digraph (`INFINITY` marks a missing edge);
/// `None` when acyclic.
fn min_cycle_mean(w: &[Vec<f64>]) -> Option<f64> {
    let k = w.len();
    let mut d = vec![vec![f64::INFINITY; k]; k + 1];
    d[0].fill(0.0);
    for step in 1..=k {
        for u in 0..k {
            let du = d[step - 1][u];
            if du.is_infinite() {
                continue;
            }
            for v in 0..k {
                let c = du + w[u][v];
                if c < d[step][v] {
                    d[step][v] = c;
                }
            }
        }
    }
    (0..k)
        .filter(|&v| d[k][v].is_finite())
        .map(|v| (0..k).filter(|&s| d[s][v].is_finite()).map(|s| (d[k][v] - d[s][v]) / (k - s) as f64).fold(f64::NEG_INFINITY, f64::max))
        .min_by(f64::total_cmp)
}

/// Shifts `pair` per support component to maximise the minimum slack over
/// cells joining different components, then normalises `min φ = 0`.
pub fn center_potentials(cost: &CostMatrix, plan: &TransportPlan, pair: &PotentialPair) -> PotentialPair {
    let (n, m) = (cost.rows(), cost.cols());
    let (comp, k) = components(n, m, plan);
    if k <= 1 {
        return pair.clone();
    }
    // w[B][A]: tightest slack of a cell from source component A to target component B
    let mut w = vec![vec![f64::INFINITY; k]; k];
    for i in 0..n {
        for j in 0..m {
            let (a, b) = (comp[i], comp[n + j]);
            if a != b {
                let s = cost.get(i, j) - pair.phi[i] - pair.phi_c[j];
                if s < w[b][a] {
                    w[b][a] = s;
                }
            }
        }
    }
    let finite_min = w.iter().flatten().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let lambda = match min_cycle_mean(&w) {
        Some(l) => l - 1e-12 * (1.0 + l.abs()),
        None if finite_min.is_finite() => finite_min,
        None => return pair.clone(),
    };
    // Bellman-Ford from a virtual source; constraint δ_A ≤ δ_B + w[B][A] − λ
    let mut delta = vec![0.0; k];
    for _ in 0..k {
        let mut changed = false;
        for b in 0..k {
            for a in 0..k {
                let c = delta[b] + w[b][a] - lambda;
                if c < delta[a] {
                    delta[a] = c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = PotentialPair {
        phi: (0..n).map(|i| pair.phi[i] + delta[comp[i]]).collect(),
        phi_c: (0..m).map(|j| pair.phi_c[j] - delta[comp[n + j]]).collect(),
    };
    let lo = out.phi.iter().copied().fold(f64::INFINITY, f64::min);
    out = out.shifted(-lo);
    out
}

/// Smallest `c − φ − φᶜ` over cells outside the support.
pub fn min_off_support_slack(cost: &CostMatrix, plan: &TransportPlan, pair: &PotentialPair) -> f64 {
    let mut on = vec![false; cost.rows() * cost.cols()];
    for e in plan.entries() {
        on[e.source * cost.cols() + e.target] = true;
    }
    let mut best = f64::INFINITY;
    for i in 0..cost.rows() {
        for j in 0..cost.cols() {
            if !on[i * cost.cols() + j] {
                best = best.min(cost.get(i, j) - pair.phi[i] - pair.phi_c[j]);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn karp_on_small_graphs() {
        let inf = f64::INFINITY;
        // two cycles: 0→1→0 mean 2, 2→2 mean 5
        let w = vec![vec![inf, 1.0, inf], vec![3.0, inf, inf], vec![inf, inf, 5.0]];
        assert_eq!(min_cycle_mean(&w), Some(2.0));
        let dag = vec![vec![inf, 1.0], vec![inf, inf]];
        assert_eq!(min_cycle_mean(&dag), None);
    }
}
