//! Gauge-norm laws. The one closed form: an indicator of measure 1 has
//! gauge norm 1/arccosh(2), since its modular is cosh(1/c) - 1 exactly.

use driftlab::grid::{Grid, GridScalarField};
use driftlab::orlicz::{embedding_check, gauge_norm, orlicz_modular, phi};
use proptest::prelude::*;

fn field_on(grid: Grid, values: Vec<f64>) -> GridScalarField {
    GridScalarField { grid, values }
}

fn small_grid() -> Grid {
    Grid::new(3, 1.0, 16).unwrap()
}

#[test]
fn unit_measure_indicator_matches_closed_form() {
    // h = 0.25 exactly, so 64 cells have measure 64 * (1/64) = 1 in f64
    let grid = Grid::new(3, 2.0, 17).unwrap();
    assert_eq!(grid.cell_measure() * 64.0, 1.0);
    let mut values = vec![0.0; grid.len()];
    for v in values.iter_mut().take(64) {
        *v = 1.0;
    }
    let f = field_on(grid, values);
    let gauge = gauge_norm(&f).unwrap();
    let reference = 1.0 / 2.0f64.acosh();
    assert!(
        (gauge.value - reference).abs() <= 1e-6,
        "gauge {} vs closed form {reference}",
        gauge.value
    );
    let modular = orlicz_modular(&f, gauge.value).unwrap();
    assert!(modular <= 1.0 + 1e-6, "modular at the gauge: {modular}");
}

#[test]
fn phi_branches_agree_at_the_switch() {
    for t in [1.0 - 1e-9, 1.0, 1.0 + 1e-9f64] {
        let a = 2.0 * (t / 2.0).sinh().powi(2);
        let b = t.cosh() - 1.0;
        assert!((a - b).abs() <= 1e-15);
        assert!((phi(t) - b).abs() <= 1e-15);
    }
    assert_eq!(phi(0.0), 0.0);
}

#[test]
fn zero_field_gauge_is_zero_without_iteration() {
    let f = GridScalarField::zeros(small_grid());
    let gauge = gauge_norm(&f).unwrap();
    assert_eq!(gauge.value, 0.0);
    assert_eq!(gauge.iterations, 0);
}

fn value_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 16 * 16 * 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_is_positively_homogeneous(values in value_vec(), alpha in 0.3..5.0f64) {
        let grid = small_grid();
        let f = field_on(grid, values.clone());
        prop_assume!(f.norm_linf() > 1e-6);
        let scaled = field_on(grid, values.iter().map(|v| alpha * v).collect());
        let g1 = gauge_norm(&f).unwrap().value;
        let g2 = gauge_norm(&scaled).unwrap().value;
        let rel = (g2 - alpha * g1).abs() / (alpha * g1);
        prop_assert!(rel <= 1e-6, "homogeneity off by {rel}");
    }

    #[test]
    fn gauge_satisfies_triangle_inequality(a in value_vec(), b in value_vec()) {
        let grid = small_grid();
        let fa = field_on(grid, a.clone());
        let fb = field_on(grid, b.clone());
        let sum = field_on(grid, a.iter().zip(&b).map(|(x, y)| x + y).collect());
        let ga = gauge_norm(&fa).unwrap().value;
        let gb = gauge_norm(&fb).unwrap().value;
        let gs = gauge_norm(&sum).unwrap().value;
        prop_assert!(gs <= ga + gb + 1e-8 * (1.0 + ga + gb));
    }

    #[test]
    fn modular_is_nonincreasing_in_the_comparator(values in value_vec(), c in 0.2..3.0f64) {
        let grid = small_grid();
        let f = field_on(grid, values);
        prop_assume!(f.norm_linf() > 1e-6);
        let m1 = orlicz_modular(&f, c).unwrap();
        let m2 = orlicz_modular(&f, c * 1.5).unwrap();
        prop_assert!(m2 < m1, "modular did not drop: {m1} -> {m2}");
    }

    #[test]
    fn gauge_is_tight(values in value_vec()) {
        let grid = small_grid();
        let f = field_on(grid, values);
        prop_assume!(f.norm_linf() > 1e-3);
        let gauge = gauge_norm(&f).unwrap().value;
        // certified side: admissible comparator
        let at = orlicz_modular(&f, gauge).unwrap();
        prop_assert!(at <= 1.0 + 1e-12);
        // sharp side: barely smaller comparators are inadmissible
        let below = orlicz_modular(&f, gauge * (1.0 - 1e-4)).unwrap();
        prop_assert!(below > 1.0, "gauge not tight: modular {below} below it");
    }

    #[test]
    fn even_norms_obey_the_embedding(values in value_vec()) {
        let grid = small_grid();
        let f = field_on(grid, values);
        let rows = embedding_check(&f, 4).unwrap();
        prop_assert_eq!(rows.len(), 4);
        for row in rows {
            prop_assert!(row.pass, "m={} lp {} exceeded bound {}", row.m, row.lp_norm, row.bound);
        }
    }
}
