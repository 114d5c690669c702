use std::f64::consts::PI;

use alexot::comparison::{comparison_angle, model_distance};
use alexot::costs::{CostMatrix, CostSpec};
use alexot::duality::{dual_objective, transform_to_sources, transform_to_targets, DiscreteMeasure, PotentialPair};
use alexot::solver::{slackness_residual, solve_exact};
use alexot::{Point, Space};
use proptest::prelude::*;

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn cost_matrix(n: usize, m: usize) -> impl Strategy<Value = CostMatrix> {
    prop::collection::vec(0.0..10.0f64, n * m).prop_map(move |d| CostMatrix::new(n, m, d).unwrap())
}

fn sized_problem() -> impl Strategy<Value = (CostMatrix, Vec<f64>, Vec<f64>)> {
    (1usize..7, 1usize..7).prop_flat_map(|(n, m)| {
        (cost_matrix(n, m), prop::collection::vec(0.1..1.0f64, n), prop::collection::vec(0.1..1.0f64, m))
            .prop_map(|(c, a, b)| (c, normalise(a), normalise(b)))
    })
}

fn normalise(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn planar_points(n: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n).prop_map(|v| v.into_iter().map(|(x, y)| Point::planar(x, y)).collect())
}

/// Vertex at the pole, sides along the meridians at longitude 0 and `gamma`.
fn sphere_hinge(a: f64, b: f64, gamma: f64) -> [Point; 3] {
    [Point::unit(0.0, 0.0, 1.0), Point::unit(a.sin(), 0.0, a.cos()), Point::unit(b.sin() * gamma.cos(), b.sin() * gamma.sin(), b.cos())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn law_of_cosines_matches_embedded_models(a in 0.01..1.4f64, b in 0.01..1.4f64, gamma in 0.0..PI) {
        // plane: Euclidean distance of the hinge endpoints
        let euclid = (b * gamma.cos() - a).hypot(b * gamma.sin());
        prop_assert!((model_distance(0.0, a, b, gamma).unwrap() - euclid).abs() <= 1e-12);

        // unit sphere: chord length in ℝ³
        let [_, x, y] = sphere_hinge(a, b, gamma);
        let (xc, yc) = (x.coords(), y.coords());
        let chord = ((xc[0] - yc[0]).powi(2) + (xc[1] - yc[1]).powi(2) + (xc[2] - yc[2]).powi(2)).sqrt();
        prop_assert!((model_distance(1.0, a, b, gamma).unwrap() - 2.0 * (0.5 * chord).asin()).abs() <= 1e-12);

        // hyperbolic plane: Minkowski product on the hyperboloid; acosh near 1
        // only keeps about half the digits, so short sides get a looser bound
        let hx = [a.sinh(), 0.0, a.cosh()];
        let hy = [b.sinh() * gamma.cos(), b.sinh() * gamma.sin(), b.cosh()];
        let q = hx[2] * hy[2] - hx[0] * hy[0] - hx[1] * hy[1];
        let hyperbolic = q.max(1.0).acosh();
        let tol = if hyperbolic > 0.1 { 1e-12 * (1.0 + hyperbolic) } else { 1e-7 };
        prop_assert!((model_distance(-1.0, a, b, gamma).unwrap() - hyperbolic).abs() <= tol);
    }

    #[test]
    fn comparison_angle_recovers_the_hinge_angle(a in 0.05..1.4f64, b in 0.05..1.4f64, gamma in 0.05..(PI - 0.05)) {
        let plane = Space::Plane;
        let [o, x, y] = [Point::planar(0.0, 0.0), Point::planar(a, 0.0), Point::planar(b * gamma.cos(), b * gamma.sin())];
        let got = comparison_angle(&plane, &o, &x, &y, 0.0).unwrap();
        prop_assert!(!got.degenerate);
        prop_assert!((got.angle - gamma).abs() <= 1e-7);

        let sphere = Space::sphere(1.0).unwrap();
        let [o, x, y] = sphere_hinge(a, b, gamma);
        let got = comparison_angle(&sphere, &o, &x, &y, 1.0).unwrap();
        prop_assert!((got.angle - gamma).abs() <= 1e-7);
    }

    #[test]
    fn c_transform_is_idempotent_after_two_steps(c in cost_matrix(4, 5), phi in prop::collection::vec(-3.0..3.0f64, 4)) {
        let phi_c = transform_to_targets(&c, &phi, 0.0).unwrap().values;
        let phi_cc = transform_to_sources(&c, &phi_c, 0.0).unwrap().values;
        let phi_ccc = transform_to_targets(&c, &phi_cc, 0.0).unwrap().values;
        prop_assert!(sup(&phi_c, &phi_ccc) <= 1e-12);
        // φᶜᶜ dominates φ
        prop_assert!(phi.iter().zip(&phi_cc).all(|(p, q)| q >= &(p - 1e-12)));
    }

    #[test]
    fn c_transform_reverses_order_and_is_nonexpansive(
        c in cost_matrix(5, 3),
        phi in prop::collection::vec(-3.0..3.0f64, 5),
        bump in prop::collection::vec(0.0..1.0f64, 5),
    ) {
        let psi: Vec<f64> = phi.iter().zip(&bump).map(|(p, b)| p + b).collect();
        let fc = transform_to_targets(&c, &phi, 0.0).unwrap().values;
        let gc = transform_to_targets(&c, &psi, 0.0).unwrap().values;
        prop_assert!(fc.iter().zip(&gc).all(|(f, g)| g <= f));
        prop_assert!(sup(&fc, &gc) <= sup(&phi, &psi) + 1e-12);
    }

    #[test]
    fn weak_duality_on_the_plane(
        xs in planar_points(4),
        ys in planar_points(3),
        phi in prop::collection::vec(-3.0..3.0f64, 4),
    ) {
        let mu0 = DiscreteMeasure::uniform(xs.clone());
        let mu1 = DiscreteMeasure::uniform(ys.clone());
        prop_assume!(mu0.is_ok() && mu1.is_ok());
        let (mu0, mu1) = (mu0.unwrap(), mu1.unwrap());
        let c = CostSpec::Quadratic.matrix(&Space::Plane, &xs, &ys).unwrap();
        let phi_c = transform_to_targets(&c, &phi, 0.0).unwrap().values;
        let pair = PotentialPair { phi, phi_c };
        prop_assert!(pair.is_feasible(&c));
        let (plan, _) = solve_exact(&c, &mu0.weights(), &mu1.weights()).unwrap();
        let dual = dual_objective(&pair, &mu0, &mu1).unwrap();
        prop_assert!(dual <= plan.cost_total() + 1e-12);
    }

    #[test]
    fn optimum_is_invariant_under_relabelling((c, a, b) in sized_problem(), rot in 0usize..7) {
        let n = c.rows();
        let r = rot % n;
        let perm: Vec<usize> = (0..n).map(|i| (i + r) % n).collect();
        let pc = CostMatrix::from_rows(&perm.iter().map(|&i| c.row(i).to_vec()).collect::<Vec<_>>()).unwrap();
        let pa: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
        let (p1, _) = solve_exact(&c, &a, &b).unwrap();
        let (p2, _) = solve_exact(&pc, &pa, &b).unwrap();
        prop_assert!((p1.cost_total() - p2.cost_total()).abs() <= 1e-9 * (1.0 + p1.cost_total()));
        let (p3, _) = solve_exact(&c.transposed(), &b, &a).unwrap();
        prop_assert!((p1.cost_total() - p3.cost_total()).abs() <= 1e-9 * (1.0 + p1.cost_total()));
    }

    #[test]
    fn optimum_scales_with_the_cost((c, a, b) in sized_problem(), s in 0.1..100.0f64) {
        let (p1, _) = solve_exact(&c, &a, &b).unwrap();
        let (p2, _) = solve_exact(&c.scaled(s), &a, &b).unwrap();
        prop_assert!((s * p1.cost_total() - p2.cost_total()).abs() <= 1e-9 * (1.0 + p2.cost_total()));
    }

    #[test]
    fn complementary_slackness_and_feasibility((c, a, b) in sized_problem()) {
        let (plan, pair) = solve_exact(&c, &a, &b).unwrap();
        prop_assert!(slackness_residual(&c, &plan, &pair) <= 1e-9);
        prop_assert!(pair.max_violation(&c) <= 1e-9);
        prop_assert!(plan.marginal_error(&a, &b) <= 1e-12);
        let dual: f64 = pair.phi.iter().zip(&a).map(|(p, w)| p * w).sum::<f64>()
            + pair.phi_c.iter().zip(&b).map(|(p, w)| p * w).sum::<f64>();
        prop_assert!((dual - plan.cost_total()).abs() <= 1e-9 * (1.0 + plan.cost_total()));
    }
}
