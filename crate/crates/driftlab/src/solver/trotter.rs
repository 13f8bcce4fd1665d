//! The three resolvent conditions behind the approximation theorem: a
//! uniform sup-norm contraction, Cauchy behavior of the approximating
//! resolvents on a compact, and `mu (mu + Lambda_n)^{-1} g -> g` uniformly
//! in `n` as `mu` grows.

use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridScalarField};
use crate::mollify::mollify_spec;
use crate::solver::resolvent::solve_resolvent;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrotterReport {
    pub epsilons: Vec<f64>,
    pub mu_values: Vec<f64>,
    /// Smallest scanned mu at which every level's scaled resolvent is a
    /// sup-norm contraction; requested mu values must exceed it.
    pub mu0: f64,
    /// `||mu (mu + Lambda_n)^{-1} g||_inf / ||g||_inf`, indexed `[level][mu]`.
    pub condition1: Vec<Vec<f64>>,
    pub pass_condition1: bool,
    pub compact_radius: f64,
    /// Per level `i`: worst sup difference on the compact against any finer
    /// level, at the smallest requested mu.
    pub condition2: Vec<f64>,
    pub pass_condition2: bool,
    /// Per mu: `sup_n ||mu (mu + Lambda_n)^{-1} g - g||_inf`.
    pub condition3: Vec<f64>,
    pub pass_condition3: bool,
    /// `(shell radius, sup over shell of |u - g|)` at the largest mu on the
    /// finest level.
    pub shell_decay: Vec<(f64, f64)>,
    pub pass_shell_decay: bool,
    pub pass: bool,
}

pub const CONTRACTION_SLACK: f64 = 1e-6;

/// Runs all three conditions for the drift mollified at each level of
/// `epsilons` (strictly decreasing), probe function `g`, and the ascending
/// `mu_values`.
pub fn trotter_conditions(
    spec: &DriftSpec,
    grid: &Grid,
    epsilons: &[f64],
    g: &GridScalarField,
    mu_values: &[f64],
    compact_radius: f64,
    lin_tol: f64,
) -> Result<TrotterReport> {
    if epsilons.len() < 2 {
        return Err(Error::parameter("need at least 2 approximation levels"));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::parameter("levels must be strictly decreasing"));
        }
    }
    if mu_values.len() < 2 || mu_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parameter("mu values must be ascending, at least 2"));
    }
    if !(compact_radius > 0.0 && compact_radius < grid.half_width) {
        return Err(Error::parameter("compact radius must lie inside the box"));
    }
    g.validate_finite()?;
    let g_sup = g.norm_linf();
    if g_sup == 0.0 {
        return Err(Error::parameter("probe function vanishes"));
    }

    let fields: Vec<_> = epsilons
        .iter()
        .map(|&eps| mollify_spec(spec, eps, grid))
        .collect::<Result<Vec<_>>>()?;

    // empirical mu floor: scan upward until the scaled resolvent contracts
    // on every level
    let mut mu0 = 0.5;
    loop {
        let ok = fields.iter().try_fold(true, |acc, b| -> Result<bool> {
            let (u, _) = solve_resolvent(b, mu0, g, lin_tol)?;
            Ok(acc && mu0 * u.norm_linf() <= g_sup * (1.0 + CONTRACTION_SLACK))
        })?;
        if ok {
            break;
        }
        mu0 *= 2.0;
        if mu0 > 1e6 {
            return Err(Error::parameter("no contracting mu found below 1e6"));
        }
    }
    if mu_values[0] <= mu0 {
        return Err(Error::parameter(format!(
            "requested mu = {} does not exceed the empirical floor mu0 = {mu0}",
            mu_values[0]
        )));
    }

    let m = epsilons.len();
    let mut condition1 = vec![vec![0.0f64; mu_values.len()]; m];
    // solutions at the smallest mu for condition 2, at every mu for 3
    let mut sols_small: Vec<GridScalarField> = Vec::with_capacity(m);
    let mut condition3 = vec![0.0f64; mu_values.len()];
    let mut finest_largest: Option<GridScalarField> = None;
    for (li, b) in fields.iter().enumerate() {
        for (mi, &mu) in mu_values.iter().enumerate() {
            let (u, _) = solve_resolvent(b, mu, g, lin_tol)?;
            let scaled = u.scaled(mu);
            condition1[li][mi] = scaled.norm_linf() / g_sup;
            let diff_sup = scaled
                .values
                .iter()
                .zip(&g.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            condition3[mi] = condition3[mi].max(diff_sup);
            if mi == 0 {
                sols_small.push(scaled.clone());
            }
            if li == m - 1 && mi == mu_values.len() - 1 {
                finest_largest = Some(scaled);
            }
        }
    }
    let pass_condition1 = condition1
        .iter()
        .flatten()
        .all(|&r| r <= 1.0 + CONTRACTION_SLACK);

    // condition 2: Cauchy on the compact
    let in_compact: Vec<usize> = (0..grid.len())
        .filter(|&idx| {
            let p = grid.point_of_index(idx);
            (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() <= compact_radius
        })
        .collect();
    let mut condition2 = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        let mut worst = 0.0f64;
        for j in i + 1..m {
            let d = in_compact
                .iter()
                .map(|&idx| (sols_small[i].values[idx] - sols_small[j].values[idx]).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(d);
        }
        condition2.push(worst);
    }
    let pass_condition2 = condition2.windows(2).all(|w| w[1] <= w[0]);
    let pass_condition3 = condition3.windows(2).all(|w| w[1] < w[0]);

    // far-field decay of |u - g| on spherical shells, finest level and
    // largest mu
    let u_far = finest_largest.expect("at least one level and one mu");
    let l = grid.half_width;
    let shells = [0.5 * l, 0.7 * l, 0.9 * l];
    let h = grid.spacing();
    let mut shell_decay = Vec::new();
    for &r in &shells {
        let mut sup = 0.0f64;
        for idx in 0..grid.len() {
            let p = grid.point_of_index(idx);
            let rr = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (rr - r).abs() <= 1.5 * h {
                sup = sup.max((u_far.values[idx] - g.values[idx]).abs());
            }
        }
        shell_decay.push((r, sup));
    }
    let pass_shell_decay = shell_decay.windows(2).all(|w| w[1].1 <= w[0].1);

    Ok(TrotterReport {
        epsilons: epsilons.to_vec(),
        mu_values: mu_values.to_vec(),
        mu0,
        condition1,
        pass_condition1,
        compact_radius,
        condition2,
        pass_condition2,
        condition3,
        pass_condition3,
        shell_decay,
        pass_shell_decay,
        pass: pass_condition1 && pass_condition2 && pass_condition3 && pass_shell_decay,
    })
}
