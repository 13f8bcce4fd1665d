//! Discrete mollification. The stencil weights sum to one, so away from the
//! box faces the operator is an averaging that fixes constants and, by
//! symmetry, affine fields; near the faces zero extension makes it strictly
//! contracting.

use driftlab::drift::DriftSpec;
use driftlab::grid::{Grid, GridScalarField, GridVectorField};
use driftlab::mollify::{mollify_field, mollify_scalar, mollify_spec};
use driftlab::rng::StreamRng;

// reach of the stencil in index cells
fn margin(grid: &Grid, eps: f64) -> usize {
    (eps / grid.spacing()).ceil() as usize
}

#[test]
fn constants_survive_mollification_on_interior_nodes() {
    let grid = Grid::new(3, 1.0, 25).unwrap();
    let eps = 0.25;
    let b = GridVectorField::from_fn(grid, |_| [2.5, -1.0, 0.125]);
    let smoothed = mollify_field(&b, eps).unwrap();
    let m = margin(&grid, eps);
    let hi = grid.points - 1 - m;
    for i in m..=hi {
        for j in m..=hi {
            for k in m..=hi {
                let idx = grid.index(i, j, k);
                assert!((smoothed.components[0][idx] - 2.5).abs() <= 1e-10);
                assert!((smoothed.components[1][idx] + 1.0).abs() <= 1e-10);
                assert!((smoothed.components[2][idx] - 0.125).abs() <= 1e-10);
            }
        }
    }
    // a face node sees the zero extension, so the constant is cut down
    let mid = grid.points / 2;
    let face = grid.index(0, mid, mid);
    assert!(smoothed.components[0][face] < 2.4);
}

#[test]
fn compact_drift_support_grows_by_less_than_the_kernel_width() {
    let grid = Grid::new(3, 1.0, 33).unwrap();
    let (r1, eps) = (0.5, 0.15);
    let spec = DriftSpec::compact_hardy(3, 1.0, r1).unwrap();
    let smoothed = mollify_spec(&spec, eps, &grid).unwrap();

    let mut sup_inside = 0.0f64;
    let mut sup_ring = 0.0f64;
    for i in 0..grid.points {
        for j in 0..grid.points {
            for k in 0..grid.points {
                let p = grid.point(i, j, k);
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let idx = grid.index(i, j, k);
                let mag = smoothed.components[0][idx].abs()
                    + smoothed.components[1][idx].abs()
                    + smoothed.components[2][idx].abs();
                if r > r1 + eps + 1e-12 {
                    // every stencil tap lies strictly within eps, so nothing
                    // can leak past the inflated ball
                    assert_eq!(mag, 0.0, "leak at radius {r}");
                } else if r > r1 {
                    sup_ring = sup_ring.max(mag);
                } else {
                    sup_inside = sup_inside.max(mag);
                }
            }
        }
    }
    assert!(sup_inside > 0.0);
    // the inflation is real: mass does cross the old support boundary
    assert!(sup_ring > 0.0);
}

#[test]
fn affine_fields_are_reproduced_away_from_the_faces() {
    let grid = Grid::new(3, 1.0, 25).unwrap();
    let eps = 0.25;
    let f = |p: [f64; 3]| 0.75 * p[0] - 0.5 * p[1] + 0.25 * p[2] + 0.3;
    let sampled = GridScalarField::from_fn(grid, f);
    let smoothed = mollify_scalar(&sampled, eps).unwrap();
    let m = margin(&grid, eps);
    let hi = grid.points - 1 - m;
    for i in m..=hi {
        for j in m..=hi {
            for k in m..=hi {
                let idx = grid.index(i, j, k);
                let want = f(grid.point(i, j, k));
                assert!(
                    (smoothed.values[idx] - want).abs() <= 1e-10,
                    "affine drift at node ({i},{j},{k})"
                );
            }
        }
    }
}

#[test]
fn sup_norm_never_increases_and_thin_kernels_are_rejected() {
    let grid = Grid::new(3, 1.0, 17).unwrap();
    let mut rng = StreamRng::new(5150, 0);
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.uniform_in(-3.0, 3.0)).collect();
    let f = GridScalarField { grid, values };
    let sup = f.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let smoothed = mollify_scalar(&f, 2.0 * grid.spacing()).unwrap();
    let sup_smoothed = smoothed.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(sup_smoothed <= sup + 1e-14);

    assert!(mollify_scalar(&f, 1.9 * grid.spacing()).is_err());
}
