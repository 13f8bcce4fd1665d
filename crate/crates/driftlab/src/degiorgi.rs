//! The De Giorgi level-set iteration: the scalar recursion with its exact
//! threshold orbit, oscillation profiles with fitted Holder exponents, and
//! the Caccioppoli energy check on grid functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{kahan_sum, GridScalarField};

/// Fast-geometric convergence target of the scalar iteration.
pub const Z_CONV_TOL: f64 = 1e-12;
const Z_DIVERGE: f64 = 1e200;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZIteration {
    pub orbit: Vec<f64>,
    /// Critical mass `z* = N^{-1/alpha} C0^{-1/alpha^2}`: initial values at
    /// or below it contract to zero, values above can blow up.
    pub z_star: f64,
    pub converged: bool,
    pub diverged: bool,
    pub steps: usize,
}

/// `z* = N^{-1/alpha} C0^{-1/alpha^2}`.
pub fn z_star(n_const: f64, c0: f64, alpha: f64) -> Result<f64> {
    if !(n_const > 0.0) || !(c0 > 1.0) || !(alpha > 0.0) {
        return Err(Error::parameter("z_star needs N > 0, C0 > 1, alpha > 0"));
    }
    Ok(n_const.powf(-1.0 / alpha) * c0.powf(-1.0 / (alpha * alpha)))
}

/// Runs `z_{m+1} = N C0^m z_m^{1+alpha}` until convergence below
/// [`Z_CONV_TOL`], divergence, or `max_steps`.
///
/// At the threshold `z0 = z*` the orbit is exactly `z* C0^{-m/alpha}`.
pub fn iterate_z(
    n_const: f64,
    c0: f64,
    alpha: f64,
    z0: f64,
    max_steps: usize,
) -> Result<ZIteration> {
    let zs = z_star(n_const, c0, alpha)?;
    if !(z0 >= 0.0) || !z0.is_finite() {
        return Err(Error::parameter("z0 must be finite and nonnegative"));
    }
    let mut orbit = vec![z0];
    let mut z = z0;
    let mut c_power = 1.0f64;
    let mut converged = z <= Z_CONV_TOL;
    let mut diverged = false;
    let mut steps = 0;
    for m in 0..max_steps {
        if converged || diverged {
            break;
        }
        z = n_const * c_power * z.powf(1.0 + alpha);
        c_power *= c0;
        orbit.push(z);
        steps = m + 1;
        if z <= Z_CONV_TOL {
            converged = true;
        }
        if !z.is_finite() || z > Z_DIVERGE {
            diverged = true;
        }
    }
    Ok(ZIteration {
        orbit,
        z_star: zs,
        converged,
        diverged,
        steps,
    })
}

/// Oscillation of `u` over the grid nodes inside the ball; `None` when the
/// ball captures no node.
pub fn oscillation(u: &GridScalarField, center: [f64; 3], radius: f64) -> Option<f64> {
    let grid = u.grid;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut seen = false;
    for idx in 0..grid.len() {
        let p = grid.point_of_index(idx);
        let d2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum();
        if d2.sqrt() <= radius {
            let v = u.values[idx];
            lo = lo.min(v);
            hi = hi.max(v);
            seen = true;
        }
    }
    if seen {
        Some(hi - lo)
    } else {
        None
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderProfile {
    pub center: [f64; 3],
    /// Dyadic radii `R 2^{-k}` that captured at least one node.
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// Least-squares slope of `log osc` against `log radius`; 1 by
    /// convention for fields with vanishing oscillation.
    pub beta: f64,
    /// Smallest `C` with `osc(rho) <= C ((rho/R)^beta osc(R) + B rho^beta)`.
    pub c_envelope: f64,
}

/// Oscillation decay over dyadic balls with a fitted Holder exponent.
/// `b_const` is the inhomogeneous budget `B` of the envelope (0 for a
/// homogeneous profile).
pub fn holder_profile(
    u: &GridScalarField,
    center: [f64; 3],
    big_r: f64,
    levels: usize,
    b_const: f64,
) -> Result<HolderProfile> {
    if !(big_r > 0.0) || levels < 3 {
        return Err(Error::parameter("holder_profile needs R > 0, levels >= 3"));
    }
    u.validate_finite()?;
    let mut radii = Vec::new();
    let mut oscs = Vec::new();
    for k in 0..levels {
        let rho = big_r * 0.5f64.powi(k as i32);
        match oscillation(u, center, rho) {
            Some(o) => {
                radii.push(rho);
                oscs.push(o);
            }
            None => break,
        }
    }
    if radii.len() < 3 {
        return Err(Error::parameter(
            "fewer than 3 dyadic balls capture grid nodes; enlarge R or refine",
        ));
    }
    let osc_scale = oscs[0];
    let beta = if osc_scale <= 1e-300 {
        1.0
    } else {
        // least squares on the levels with positive oscillation
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (r, o) in radii.iter().zip(&oscs) {
            if *o > 0.0 {
                xs.push(r.ln());
                ys.push(o.ln());
            }
        }
        if xs.len() < 2 {
            1.0
        } else {
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            sxy / sxx
        }
    };
    let mut c_env = 0.0f64;
    for (r, o) in radii.iter().zip(&oscs) {
        let envelope = (r / big_r).powf(beta) * osc_scale + b_const * r.powf(beta);
        if envelope > 0.0 {
            c_env = c_env.max(o / envelope);
        }
    }
    Ok(HolderProfile {
        center,
        radii,
        oscillations: oscs,
        beta,
        c_envelope: c_env,
    })
}

/// One-step oscillation reduction
/// `osc(u, R/2) <= (1 - 2^{-d-2}) osc(u, 2R) + C2 R^{2/p}`.
pub fn oscillation_reduction(
    u: &GridScalarField,
    center: [f64; 3],
    big_r: f64,
    c2: f64,
    p: f64,
) -> Result<(f64, f64, bool)> {
    if !(p >= 2.0) {
        return Err(Error::parameter("oscillation reduction needs p >= 2"));
    }
    let inner = oscillation(u, center, 0.5 * big_r)
        .ok_or_else(|| Error::parameter("inner ball captures no node"))?;
    let outer = oscillation(u, center, 2.0 * big_r)
        .ok_or_else(|| Error::parameter("outer ball captures no node"))?;
    let d = 3.0;
    let rhs = (1.0 - 0.5f64.powf(d + 2.0)) * outer + c2 * big_r.powf(2.0 / p);
    Ok((inner, rhs, inner <= rhs))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    pub k_level: f64,
    /// Measure of `{u > k} intersect B_R`.
    pub level_measure: f64,
    /// `int zeta^2 |grad (u - k)_+|^2`.
    pub energy_lhs: f64,
    /// `int |grad zeta|^2 (u - k)_+^2`.
    pub energy_rhs: f64,
    /// Minimal admissible constant `lhs / rhs`.
    pub k_min: f64,
    pub skipped: bool,
}

/// Caccioppoli quotient for the truncation `(u - k)_+` with the linear
/// cutoff between `r` and `R` around `center`.
///
/// Admissible exponents: `p >= 2` and `p > 2 / (2 - sqrt(delta))`.
pub fn caccioppoli_check(
    u: &GridScalarField,
    center: [f64; 3],
    r: f64,
    big_r: f64,
    k_level: f64,
    p: f64,
    delta: f64,
) -> Result<CaccioppoliReport> {
    if !(r > 0.0 && big_r > r) {
        return Err(Error::parameter("need 0 < r < R"));
    }
    if !(0.0..4.0).contains(&delta) {
        return Err(Error::parameter("delta must lie in [0, 4)"));
    }
    if p < 2.0 || p <= 2.0 / (2.0 - delta.sqrt()) {
        return Err(Error::parameter(
            "inadmissible exponent: need p >= 2 and p > 2/(2 - sqrt(delta))",
        ));
    }
    u.validate_finite()?;
    let grid = u.grid;
    let n = grid.points;
    let h = grid.spacing();
    let h3 = grid.cell_measure();
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;

    // v = (u - k)_+ and the cutoff, both on the full grid
    let v: Vec<f64> = u.values.iter().map(|&x| (x - k_level).max(0.0)).collect();
    let zeta: Vec<f64> = (0..grid.len())
        .map(|id| {
            let pt = grid.point_of_index(id);
            let dist: f64 = (0..3)
                .map(|a| (pt[a] - center[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            ((big_r - dist) / (big_r - r)).clamp(0.0, 1.0)
        })
        .collect();
    let grad_zeta_sq = 1.0 / ((big_r - r) * (big_r - r));

    let mut level_nodes = 0usize;
    let mut lhs_terms = Vec::new();
    let mut rhs_terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let id = idx(i, j, k);
                let pt = grid.point(i, j, k);
                let dist: f64 = (0..3)
                    .map(|a| (pt[a] - center[a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if dist <= big_r && v[id] > 0.0 {
                    level_nodes += 1;
                }
                // centered differences of v, zero ghosts
                let gx = (nb(&v, i + 1 < n, idx((i + 1).min(n - 1), j, k))
                    - nb(&v, i > 0, idx(i.saturating_sub(1), j, k)))
                    / (2.0 * h);
                let gy = (nb(&v, j + 1 < n, idx(i, (j + 1).min(n - 1), k))
                    - nb(&v, j > 0, idx(i, j.saturating_sub(1), k)))
                    / (2.0 * h);
                let gz = (nb(&v, k + 1 < n, idx(i, j, (k + 1).min(n - 1)))
                    - nb(&v, k > 0, idx(i, j, k.saturating_sub(1))))
                    / (2.0 * h);
                let g2 = gx * gx + gy * gy + gz * gz;
                lhs_terms.push(zeta[id] * zeta[id] * g2);
                if zeta[id] > 0.0 && zeta[id] < 1.0 {
                    rhs_terms.push(grad_zeta_sq * v[id] * v[id]);
                }
            }
        }
    }
    let level_measure = level_nodes as f64 * h3;
    if level_nodes == 0 {
        return Ok(CaccioppoliReport {
            k_level,
            level_measure: 0.0,
            energy_lhs: 0.0,
            energy_rhs: 0.0,
            k_min: 0.0,
            skipped: true,
        });
    }
    let energy_lhs = h3 * kahan_sum(lhs_terms.into_iter());
    let energy_rhs = h3 * kahan_sum(rhs_terms.into_iter());
    let k_min = if energy_rhs > 0.0 {
        energy_lhs / energy_rhs
    } else {
        f64::INFINITY
    };
    Ok(CaccioppoliReport {
        k_level,
        level_measure,
        energy_lhs,
        energy_rhs,
        k_min,
        skipped: false,
    })
}

#[inline]
fn nb(v: &[f64], cond: bool, idx: usize) -> f64 {
    if cond {
        v[idx]
    } else {
        0.0
    }
}
