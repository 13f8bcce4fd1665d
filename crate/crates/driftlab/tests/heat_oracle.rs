//! Drift-free evolution against the exact discrete solution.
//!
//! With zero ghost values the mode prod_a sin(k_a pi (i_a+1)/(N+1)) is an
//! eigenvector of the discrete Laplacian with eigenvalue
//! sum_a (2 - 2 cos(k_a pi/(N+1)))/h^2, so backward Euler multiplies it by
//! exactly 1/(1 + tau*lambda) per step. That gives a closed-form reference
//! for the full time loop, independent of the solver implementation.

use driftlab::grid::{Grid, GridScalarField, GridVectorField};
use driftlab::solver::{evolve, DriftMeta, EvolutionConfig};

fn eigenmode(grid: Grid, modes: [usize; 3]) -> (GridScalarField, f64) {
    let n = grid.points;
    let h = grid.spacing();
    let mut values = vec![0.0; grid.len()];
    let axis = |k: usize, i: usize| {
        (k as f64 * std::f64::consts::PI * (i as f64 + 1.0) / (n as f64 + 1.0)).sin()
    };
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                values[(i * n + j) * n + l] = axis(modes[0], i) * axis(modes[1], j) * axis(modes[2], l);
            }
        }
    }
    let lambda: f64 = modes
        .iter()
        .map(|&k| {
            let theta = k as f64 * std::f64::consts::PI / (n as f64 + 1.0);
            (2.0 - 2.0 * theta.cos()) / (h * h)
        })
        .sum();
    (GridScalarField { grid, values }, lambda)
}

fn run_mode(modes: [usize; 3], tau: f64, steps: usize) {
    let grid = Grid::new(3, 1.0, 16).unwrap();
    let b = GridVectorField::zeros(grid);
    let (f0, lambda) = eigenmode(grid, modes);
    let config = EvolutionConfig {
        tau,
        t_final: tau * steps as f64,
        lin_tol: 1e-12,
        snapshot_stride: 0,
        track_ps: vec![2.0],
        gauge_stride: 0,
    };
    let run = evolve(&b, &f0, &config, DriftMeta::free()).unwrap();
    assert_eq!(run.steps, steps);

    let factor = (1.0 + tau * lambda).powi(-(steps as i32));
    let (_, u) = run.snapshots.last().unwrap();
    let scale = f0.norm_linf();
    for (uv, fv) in u.values.iter().zip(&f0.values) {
        assert!(
            (uv - factor * fv).abs() <= 1e-9 * scale,
            "pointwise mismatch: {uv} vs {}",
            factor * fv
        );
    }
}

#[test]
fn backward_euler_reproduces_fundamental_mode() {
    run_mode([1, 1, 1], 2e-3, 25);
}

#[test]
fn backward_euler_reproduces_mixed_mode() {
    run_mode([2, 1, 3], 1e-3, 40);
}

#[test]
fn heat_l2_norm_decays_monotonically() {
    let grid = Grid::new(3, 1.0, 20).unwrap();
    let b = GridVectorField::zeros(grid);
    let f0 = GridScalarField::from_fn(grid, |x| {
        (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 0.08).exp()
    });
    let config = EvolutionConfig {
        tau: 1e-3,
        t_final: 0.03,
        lin_tol: 1e-10,
        snapshot_stride: 0,
        track_ps: vec![2.0, 4.0],
        gauge_stride: 0,
    };
    let run = evolve(&b, &f0, &config, DriftMeta::free()).unwrap();
    for hist in run.lp_history.iter().chain([&run.linf_history]) {
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "norm grew: {} -> {}", w[0], w[1]);
        }
    }
    assert!(run.max_principle_violation <= 1e-12);
}
