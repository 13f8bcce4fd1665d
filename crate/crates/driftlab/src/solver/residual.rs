//! Weak-form residual of computed evolutions against smooth space-time test
//! functions, measured across a discretization refinement ladder.
//!
//! For an exact weak solution and a test function compactly supported in
//! `(0, T) x box`, the functional
//! `int int (-u dps/dt + grad u . grad psi + (b . grad u) psi) dx dt`
//! vanishes; for the scheme it shrinks with the truncation error.

use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::error::{Error, Result};
use crate::grid::{kahan_sum, Grid, GridScalarField, GridVectorField};
use crate::mollify::{bump_profile, bump_profile_deriv, mollify_spec};
use crate::solver::evolve::Stepper;

/// Separable bump `psi(t, x) = B(|x - center| / radius) B((t - t_center) / t_halfwidth)`
/// with the standard smooth compactly supported profile `B`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpaceTimeTest {
    pub center: [f64; 3],
    pub radius: f64,
    pub t_center: f64,
    pub t_halfwidth: f64,
}

impl SpaceTimeTest {
    /// Rejects test functions whose support leaks out of `(0, T) x box`.
    pub fn validate(&self, grid: &Grid, t_final: f64) -> Result<()> {
        if !(self.radius > 0.0) || !(self.t_halfwidth > 0.0) {
            return Err(Error::validation("test", "radius and t_halfwidth must be positive"));
        }
        for a in 0..3 {
            if self.center[a].abs() + self.radius >= grid.half_width {
                return Err(Error::validation(
                    "test",
                    "spatial support is not compactly contained in the box",
                ));
            }
        }
        if self.t_center - self.t_halfwidth <= 0.0 || self.t_center + self.t_halfwidth >= t_final {
            return Err(Error::validation(
                "test",
                "time support is not compactly contained in (0, T)",
            ));
        }
        Ok(())
    }

    fn space(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        let dx = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
        ];
        let r = (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt();
        let s = r / self.radius;
        let val = bump_profile(s);
        if r == 0.0 || s >= 1.0 {
            return (val, [0.0; 3]);
        }
        let dv = bump_profile_deriv(s) / (self.radius * r);
        (val, [dv * dx[0], dv * dx[1], dv * dx[2]])
    }

    fn time(&self, t: f64) -> (f64, f64) {
        let s = (t - self.t_center) / self.t_halfwidth;
        (
            bump_profile(s),
            bump_profile_deriv(s) / self.t_halfwidth,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `(h, tau, residual per test)` along the refinement ladder.
    pub levels: Vec<(f64, f64, Vec<f64>)>,
    /// Residual decay ratios between consecutive levels, per test.
    pub decay_ratios: Vec<Vec<f64>>,
    pub pass: bool,
}

/// Runs the scheme on every `(points, tau)` level with the same continuum
/// drift (mollified at fixed `eps`) and initial datum, and integrates the
/// weak-form defect against each test function.
///
/// Pass requires the residual of every test to shrink by at least 25% per
/// refinement and the coarse levels to stay within the `h^2 + tau` budget
/// calibrated from the finest level.
pub fn weak_solution_residual(
    spec: &DriftSpec,
    eps: f64,
    half_width: f64,
    f0: impl Fn([f64; 3]) -> f64 + Sync,
    levels: &[(usize, f64)],
    t_final: f64,
    tests: &[SpaceTimeTest],
    lin_tol: f64,
) -> Result<ResidualReport> {
    if levels.len() < 2 {
        return Err(Error::parameter("refinement ladder needs at least 2 levels"));
    }
    if tests.is_empty() {
        return Err(Error::parameter("no test functions supplied"));
    }

    let mut rows: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for &(points, tau) in levels {
        let grid = Grid::new(3, half_width, points)?;
        for test in tests {
            test.validate(&grid, t_final)?;
        }
        let b = mollify_spec(spec, eps, &grid)?;
        let u0 = GridScalarField::from_fn(grid, &f0);
        let residuals = residual_one_level(&grid, &b, &u0, tau, t_final, tests, lin_tol)?;
        rows.push((grid.spacing(), tau, residuals));
    }

    let mut decay_ratios = Vec::new();
    for w in rows.windows(2) {
        let r: Vec<f64> = w[0]
            .2
            .iter()
            .zip(&w[1].2)
            .map(|(c, f)| if *f > 0.0 { c / f } else { f64::INFINITY })
            .collect();
        decay_ratios.push(r);
    }
    let shrinking = decay_ratios
        .iter()
        .all(|r| r.iter().all(|&ratio| ratio >= 4.0 / 3.0));
    // budget from the finest level: |R| <= C (h^2 + tau) with C calibrated
    // there (factor 4 headroom)
    let (hf, tf, rf) = rows.last().unwrap().clone();
    let fine_scale = hf * hf + tf;
    let pass_budget = rows.iter().all(|(h, tau, r)| {
        let scale = h * h + tau;
        r.iter()
            .zip(&rf)
            .all(|(ri, rfi)| *ri <= 4.0 * rfi / fine_scale * scale)
    });
    Ok(ResidualReport {
        levels: rows,
        decay_ratios,
        pass: shrinking && pass_budget,
    })
}

fn residual_one_level(
    grid: &Grid,
    b: &GridVectorField,
    f0: &GridScalarField,
    tau: f64,
    t_final: f64,
    tests: &[SpaceTimeTest],
    lin_tol: f64,
) -> Result<Vec<f64>> {
    let n_steps = (t_final / tau).round() as usize;
    let mut stepper = Stepper::new(b, f0, tau, lin_tol)?;
    let mut prev: Vec<f64> = tests
        .iter()
        .map(|t| integrand(grid, b, &stepper, t))
        .collect();
    let mut totals = vec![0.0f64; tests.len()];
    for _ in 0..n_steps {
        stepper.step()?;
        for (ti, test) in tests.iter().enumerate() {
            let g = integrand(grid, b, &stepper, test);
            totals[ti] += 0.5 * tau * (prev[ti] + g);
            prev[ti] = g;
        }
    }
    Ok(totals.iter().map(|t| t.abs()).collect())
}

/// Spatial part of the weak form at the stepper's current time.
fn integrand(grid: &Grid, b: &GridVectorField, stepper: &Stepper, test: &SpaceTimeTest) -> f64 {
    let (tv, tdot) = test.time(stepper.t);
    if tv == 0.0 && tdot == 0.0 {
        return 0.0;
    }
    let n = grid.points;
    let h = grid.spacing();
    let u = &stepper.u;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let h3 = grid.cell_measure();
    let mut terms = Vec::with_capacity(grid.len());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = grid.point(i, j, k);
                let (sv, sg) = test.space(x);
                if sv == 0.0 && sg == [0.0; 3] {
                    continue;
                }
                let id = idx(i, j, k);
                let c = u[id];
                // centered gradient of u, zero ghosts
                let gx = (pick(u, i + 1 < n, idx(i.min(n - 2) + 1, j, k))
                    - pick(u, i > 0, idx(i.max(1) - 1, j, k)))
                    / (2.0 * h);
                let gy = (pick(u, j + 1 < n, idx(i, j.min(n - 2) + 1, k))
                    - pick(u, j > 0, idx(i, j.max(1) - 1, k)))
                    / (2.0 * h);
                let gz = (pick(u, k + 1 < n, idx(i, j, k.min(n - 2) + 1))
                    - pick(u, k > 0, idx(i, j, k.max(1) - 1)))
                    / (2.0 * h);
                let bdotgrad =
                    b.components[0][id] * gx + b.components[1][id] * gy + b.components[2][id] * gz;
                let term = -c * sv * tdot
                    + (gx * sg[0] + gy * sg[1] + gz * sg[2]) * tv
                    + bdotgrad * sv * tv;
                terms.push(term);
            }
        }
    }
    h3 * kahan_sum(terms.into_iter())
}

#[inline]
fn pick(u: &[f64], cond: bool, idx: usize) -> f64 {
    if cond {
        u[idx]
    } else {
        0.0
    }
}
