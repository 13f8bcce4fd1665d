//! Cauchy-sequence comparison of evolutions driven by successive
//! mollifications of one drift.
//!
//! All levels share the initial datum and the time grid and are stepped in
//! lockstep, so the pairwise damped differences `v_i - v_j` can be
//! accumulated without retaining any trajectory.

use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::error::{Error, Result};
use crate::grid::{dirichlet_energy_diff_raw, Grid, GridScalarField};
use crate::mollify::mollify_spec;
use crate::orlicz::gauge_norm;
use crate::solver::evolve::{DriftMeta, Stepper};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyReport {
    pub epsilons: Vec<f64>,
    pub t0: f64,
    /// `sup_{s <= t0} ||v_i - v_j||_Phi`, symmetric, zero diagonal.
    pub sup_gauge: Vec<Vec<f64>>,
    /// `int_0^{t0} ||grad (v_i - v_j)||_2^2 ds`, symmetric, zero diagonal.
    pub grad_integral: Vec<Vec<f64>>,
    /// Row maxima of the two tables over pairs `(i, j > i)`; monotone
    /// decay of these is the Cauchy property in the level index.
    pub gauge_by_level: Vec<f64>,
    pub grad_by_level: Vec<f64>,
    /// `grad(i, i+1) / grad(i+1, i+2)` for consecutive level pairs.
    pub grad_ratios: Vec<f64>,
    pub pass_gauge_monotone: bool,
    pub pass_grad_monotone: bool,
    pub pass: bool,
}

/// Evolves the drift mollified at every level of `epsilons` (strictly
/// decreasing, at least three levels) and measures how fast the damped
/// solutions `v = e^{-lambda t} u` close up in the Orlicz gauge and in
/// integrated Dirichlet energy.
#[allow(clippy::too_many_arguments)]
pub fn semigroup_cauchy(
    spec: &DriftSpec,
    grid: &Grid,
    epsilons: &[f64],
    f0: &GridScalarField,
    tau: f64,
    t0: f64,
    lin_tol: f64,
    meta: DriftMeta,
    gauge_stride: usize,
) -> Result<CauchyReport> {
    if epsilons.len() < 3 {
        return Err(Error::parameter(
            "cauchy comparison needs at least 3 mollification levels",
        ));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::parameter(
                "mollification levels must be strictly decreasing",
            ));
        }
    }
    let n_steps = (t0 / tau).round() as usize;
    if n_steps == 0 {
        return Err(Error::config("no steps: t0 / tau rounds to zero"));
    }

    let fields: Vec<_> = epsilons
        .iter()
        .map(|&eps| mollify_spec(spec, eps, grid))
        .collect::<Result<Vec<_>>>()?;
    let mut steppers: Vec<Stepper> = fields
        .iter()
        .map(|b| Stepper::new(b, f0, tau, lin_tol))
        .collect::<Result<Vec<_>>>()?;

    let m = epsilons.len();
    let lambda = meta.lambda;
    let mut sup_gauge = vec![vec![0.0f64; m]; m];
    let mut grad_integral = vec![vec![0.0f64; m]; m];
    let mut grad_prev = vec![vec![0.0f64; m]; m];

    let sample_gauge = |steppers: &[Stepper],
                            t: f64,
                            sup: &mut Vec<Vec<f64>>|
     -> Result<()> {
        let damp = (-lambda * t).exp();
        for i in 0..m {
            for j in (i + 1)..m {
                let diff = GridScalarField {
                    grid: *grid,
                    values: steppers[i]
                        .u
                        .iter()
                        .zip(&steppers[j].u)
                        .map(|(a, b)| damp * (a - b))
                        .collect(),
                };
                let g = gauge_norm(&diff)?.value;
                if g > sup[i][j] {
                    sup[i][j] = g;
                    sup[j][i] = g;
                }
            }
        }
        Ok(())
    };

    for n in 1..=n_steps {
        for s in steppers.iter_mut() {
            s.step()?;
        }
        let t = n as f64 * tau;
        let damp2 = (-2.0 * lambda * t).exp();
        for i in 0..m {
            for j in (i + 1)..m {
                let g = damp2 * dirichlet_energy_diff_raw(grid, &steppers[i].u, &steppers[j].u);
                grad_integral[i][j] += 0.5 * tau * (grad_prev[i][j] + g);
                grad_integral[j][i] = grad_integral[i][j];
                grad_prev[i][j] = g;
            }
        }
        if n == n_steps || (gauge_stride > 0 && n % gauge_stride == 0) {
            sample_gauge(&steppers, t, &mut sup_gauge)?;
        }
    }

    let row_max = |table: &Vec<Vec<f64>>| -> Vec<f64> {
        (0..m - 1)
            .map(|i| {
                ((i + 1)..m)
                    .map(|j| table[i][j])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    };
    let gauge_by_level = row_max(&sup_gauge);
    let grad_by_level = row_max(&grad_integral);
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    let pass_gauge_monotone = monotone(&gauge_by_level);
    let pass_grad_monotone = monotone(&grad_by_level);
    let mut grad_ratios = Vec::new();
    for i in 0..m - 2 {
        let a = grad_integral[i][i + 1];
        let b = grad_integral[i + 1][i + 2];
        grad_ratios.push(if b > 0.0 { a / b } else { f64::INFINITY });
    }
    let vanishing = grad_by_level.last().copied().unwrap_or(0.0)
        <= 0.25 * grad_by_level.first().copied().unwrap_or(0.0);
    Ok(CauchyReport {
        epsilons: epsilons.to_vec(),
        t0,
        sup_gauge,
        grad_integral,
        gauge_by_level,
        grad_by_level,
        grad_ratios,
        pass_gauge_monotone,
        pass_grad_monotone,
        pass: pass_gauge_monotone && pass_grad_monotone && vanishing,
    })
}
