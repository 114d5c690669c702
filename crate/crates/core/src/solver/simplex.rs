//! Transportation simplex on a spanning-tree basis.
//!
//! Nodes `0..n` are sources and `n..n + m` targets; a basis is a spanning
//! tree of `n + m − 1` cells. Supplies are perturbed (`aᵢ + ε`,
//! `b_last + nε`) so every basic flow is strictly positive, which rules out
//! degenerate pivots; the perturbation is removed by recomputing flows on
//! the final tree with the true weights.

use super::PivotRule;
use crate::costs::CostMatrix;
use crate::error::{Error, Result};

pub(super) struct Basis {
    pub cells: Vec<(usize, usize)>,
    pub iterations: usize,
}

struct Rooted {
    parent: Vec<usize>,
    /// Index into `cells` of the edge to the parent; unused at the root.
    parent_cell: Vec<usize>,
    depth: Vec<usize>,
    /// Breadth-first order from the root (node 0).
    order: Vec<usize>,
}

fn root(n: usize, m: usize, cells: &[(usize, usize)]) -> Rooted {
    let nodes = n + m;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for (k, &(i, j)) in cells.iter().enumerate() {
        adj[i].push((n + j, k));
        adj[n + j].push((i, k));
    }
    let mut parent = vec![usize::MAX; nodes];
    let mut parent_cell = vec![usize::MAX; nodes];
    let mut depth = vec![0; nodes];
    let mut order = Vec::with_capacity(nodes);
    let mut seen = vec![false; nodes];
    seen[0] = true;
    order.push(0);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(w, k) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                parent_cell[w] = k;
                depth[w] = depth[v] + 1;
                order.push(w);
            }
        }
    }
    debug_assert_eq!(order.len(), nodes, "basis is not spanning");
    Rooted { parent, parent_cell, depth, order }
}

/// Node potentials with `u₀ = 0` and `uᵢ + v_j = c_ij` on basic cells.
fn potentials(n: usize, cost: &CostMatrix, cells: &[(usize, usize)], t: &Rooted) -> Vec<f64> {
    let mut pot = vec![0.0; t.order.len()];
    for &v in &t.order[1..] {
        let (i, j) = cells[t.parent_cell[v]];
        pot[v] = cost.get(i, j) - pot[t.parent[v]];
    }
    debug_assert!(n <= pot.len());
    pot
}

/// Basic flows for the given supplies, peeling leaves towards the root.
fn flows(n: usize, supply: &[f64], cells: &[(usize, usize)], t: &Rooted) -> Vec<f64> {
    let mut rest = supply.to_vec();
    let mut flow = vec![0.0; cells.len()];
    for &v in t.order[1..].iter().rev() {
        let k = t.parent_cell[v];
        flow[k] = rest[v];
        rest[t.parent[v]] -= rest[v];
    }
    debug_assert!(n <= rest.len());
    flow
}

fn north_west(a: &[f64], b: &[f64]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    let mut cells = Vec::with_capacity(n + m - 1);
    loop {
        cells.push((i, j));
        if i + 1 == n && j + 1 == m {
            return cells;
        }
        if j + 1 == m || (i + 1 < n && ra < rb) {
            rb -= ra;
            i += 1;
            ra = a[i];
        } else {
            ra -= rb;
            j += 1;
            rb = b[j];
        }
    }
}

fn entering(cost: &CostMatrix, pot: &[f64], rule: PivotRule, tol: f64) -> Option<(usize, usize)> {
    let (n, m) = (cost.rows(), cost.cols());
    let reduced = |i: usize, j: usize| cost.get(i, j) - pot[i] - pot[n + j];
    match rule {
        PivotRule::Bland => (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).find(|&(i, j)| reduced(i, j) < -tol),
        PivotRule::ReverseBland => (0..n).rev().flat_map(|i| (0..m).rev().map(move |j| (i, j))).find(|&(i, j)| reduced(i, j) < -tol),
        PivotRule::Dantzig => {
            let mut best = None;
            let mut most = -tol;
            for i in 0..n {
                for j in 0..m {
                    let r = reduced(i, j);
                    if r < most {
                        most = r;
                        best = Some((i, j));
                    }
                }
            }
            best
        }
    }
}

/// Cells of the cycle closed by `(i, j)` that lose flow when it enters.
fn losing_cells(n: usize, i: usize, j: usize, t: &Rooted) -> Vec<usize> {
    let (mut p, mut q) = (i, n + j);
    let (mut from_p, mut from_q) = (Vec::new(), Vec::new());
    while t.depth[p] > t.depth[q] {
        from_p.push(t.parent_cell[p]);
        p = t.parent[p];
    }
    while t.depth[q] > t.depth[p] {
        from_q.push(t.parent_cell[q]);
        q = t.parent[q];
    }
    while p != q {
        from_p.push(t.parent_cell[p]);
        from_q.push(t.parent_cell[q]);
        p = t.parent[p];
        q = t.parent[q];
    }
    // signs alternate starting with a loss next to each endpoint
    from_p.into_iter().step_by(2).chain(from_q.into_iter().step_by(2)).collect()
}

pub(super) fn perturbed_supplies(a: &[f64], b: &[f64], eps: f64) -> Vec<f64> {
    let n = a.len();
    let mut s: Vec<f64> = a.iter().map(|w| w + eps).chain(b.iter().copied()).collect();
    *s.last_mut().expect("nonempty") += n as f64 * eps;
    s
}

pub(super) fn run(cost: &CostMatrix, a: &[f64], b: &[f64], rule: PivotRule, eps: f64, max_iterations: usize) -> Result<Basis> {
    let (n, m) = (cost.rows(), cost.cols());
    let supply = perturbed_supplies(a, b, eps);
    let mut cells = north_west(&supply[..n], &supply[n..]);
    let tol = 1e-12 * (1.0 + cost.max_abs());
    for iterations in 0..max_iterations {
        let t = root(n, m, &cells);
        let pot = potentials(n, cost, &cells, &t);
        let Some((i, j)) = entering(cost, &pot, rule, tol) else {
            return Ok(Basis { cells, iterations });
        };
        let flow = flows(n, &supply, &cells, &t);
        let leave = losing_cells(n, i, j, &t)
            .into_iter()
            .min_by(|&k, &l| flow[k].total_cmp(&flow[l]).then(cells[k].cmp(&cells[l])))
            .expect("a cycle always has a losing cell");
        cells[leave] = (i, j);
    }
    Err(Error::Degenerate(format!("simplex did not terminate within {max_iterations} pivots")))
}

/// True flows and node potentials on a final basis.
pub(super) fn evaluate(cost: &CostMatrix, a: &[f64], b: &[f64], cells: &[(usize, usize)]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let t = root(n, b.len(), cells);
    let supply: Vec<f64> = a.iter().chain(b).copied().collect();
    (flows(n, &supply, cells, &t), potentials(n, cost, cells, &t))
}
