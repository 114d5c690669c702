//! Exhaustive optimum for tiny instances, independent of the simplex code.
//! Uniform square instances enumerate permutations (Birkhoff); otherwise
//! every choice of `n + m − 1` cells is tried as a basis.

use itertools::Itertools;

use crate::costs::CostMatrix;
use crate::error::{Error, Result};

pub const MAX_PERMUTATION_SIZE: usize = 8;
pub const MAX_BASIS_CELLS: usize = 12;

fn is_uniform(w: &[f64], n: usize) -> bool {
    w.iter().all(|&x| (x - 1.0 / n as f64).abs() <= 1e-15)
}

pub fn oracle_bruteforce(cost: &CostMatrix, w0: &[f64], w1: &[f64]) -> Result<f64> {
    let (n, m) = (cost.rows(), cost.cols());
    super::validate(cost, w0, w1)?;
    if n == m && n <= MAX_PERMUTATION_SIZE && is_uniform(w0, n) && is_uniform(w1, m) {
        let best =
            (0..n).permutations(n).map(|p| p.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum::<f64>()).fold(f64::INFINITY, f64::min);
        return Ok(best / n as f64);
    }
    if n * m <= MAX_BASIS_CELLS {
        return Ok(vertex_enumeration(cost, w0, w1));
    }
    Err(Error::Size(format!("oracle handles n = m ≤ {MAX_PERMUTATION_SIZE} with uniform weights or n·m ≤ {MAX_BASIS_CELLS}, got {n}x{m}")))
}

/// Solves the marginal equations restricted to `cells` by repeatedly fixing
/// a cell that is alone in its row or column. `None` if the cells are not a
/// basis or the solution has a negative entry.
fn basic_solution(w0: &[f64], w1: &[f64], cells: &[(usize, usize)]) -> Option<Vec<f64>> {
    let mut row_rest = w0.to_vec();
    let mut col_rest = w1.to_vec();
    let mut value = vec![None; cells.len()];
    for _ in 0..cells.len() {
        let open = |k: usize, value: &[Option<f64>]| value[k].is_none().then_some(cells[k]);
        let pick = (0..cells.len()).find_map(|k| {
            let (i, j) = open(k, &value)?;
            let alone_in_row = (0..cells.len()).filter(|&l| open(l, &value).is_some_and(|c| c.0 == i)).count() == 1;
            let alone_in_col = (0..cells.len()).filter(|&l| open(l, &value).is_some_and(|c| c.1 == j)).count() == 1;
            if alone_in_row {
                Some((k, row_rest[i]))
            } else if alone_in_col {
                Some((k, col_rest[j]))
            } else {
                None
            }
        })?;
        let (k, x) = pick;
        let (i, j) = cells[k];
        value[k] = Some(x);
        row_rest[i] -= x;
        col_rest[j] -= x;
    }
    let residual = row_rest.iter().chain(&col_rest).fold(0.0f64, |a, r| a.max(r.abs()));
    let x: Vec<f64> = value.into_iter().map(|v| v.expect("all fixed")).collect();
    (residual <= 1e-12 && x.iter().all(|&v| v >= -1e-15)).then_some(x)
}

fn vertex_enumeration(cost: &CostMatrix, w0: &[f64], w1: &[f64]) -> f64 {
    let (n, m) = (cost.rows(), cost.cols());
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    all.into_iter()
        .combinations(n + m - 1)
        .filter_map(|cells| {
            let x = basic_solution(w0, w1, &cells)?;
            Some(cells.iter().zip(&x).map(|(&(i, j), v)| v * cost.get(i, j)).sum::<f64>())
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let one = CostMatrix::new(1, 1, vec![3.5]).unwrap();
        assert_eq!(oracle_bruteforce(&one, &[1.0], &[1.0]).unwrap(), 3.5);
        let two = CostMatrix::from_rows(&[vec![0.5, 2.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(oracle_bruteforce(&two, &[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn vertex_route_agrees_with_permutations() {
        let c = CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]]).unwrap();
        let u = [1.0 / 3.0; 3];
        let by_perm = oracle_bruteforce(&c, &u, &u).unwrap();
        assert!((vertex_enumeration(&c, &u, &u) - by_perm).abs() < 1e-15);
        // hand count: the best of the 6 permutations is 1 + 2 + 2
        assert!((by_perm - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn non_uniform_weights() {
        // all mass of source 0 goes to the cheap target, the remainder splits
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let v = oracle_bruteforce(&c, &[0.25, 0.75], &[0.5, 0.25, 0.25]).unwrap();
        // source 1 must ship 0.25 to target 0 and 0.25 to target 1 at cost 1 each
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn size_limit() {
        let c = CostMatrix::new(3, 5, vec![0.0; 15]).unwrap();
        assert!(matches!(oracle_bruteforce(&c, &[1.0 / 3.0; 3], &[0.2; 5]), Err(Error::Size(_))));
    }
}
