//! Friedrichs mollifier: the bump kernel, its normalization constant, and
//! discrete convolution against grid fields.
//!
//! The kernel profile is `gamma(x) = exp(1/(|x|^2 - 1))` inside the unit ball
//! and zero outside; `gamma_eps(x) = c_gamma eps^{-d} gamma(x/eps)`. The
//! analytic constant `c_gamma` comes from adaptive quadrature. The discrete
//! convolution instead normalizes the sampled stencil weights to sum exactly
//! to one, so constants are preserved to machine precision and Young's
//! inequality holds as a strict convex-combination statement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridScalarField, GridVectorField};
use crate::quad::adaptive_simpson;

/// Unnormalized profile, as a function of the radius ratio `t = |x|/eps`.
#[inline]
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 / (t * t - 1.0)).exp()
    } else {
        0.0
    }
}

/// Derivative of [`bump_profile`]; smooth, zero outside `(-1, 1)`.
#[inline]
pub fn bump_profile_deriv(t: f64) -> f64 {
    if t.abs() < 1.0 {
        let d = t * t - 1.0;
        (1.0 / d).exp() * (-2.0 * t / (d * d))
    } else {
        0.0
    }
}

/// Volume of the unit ball in `R^d` via the two-step recurrence.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Normalization constant: `c` with `int_{B_1} c exp(1/(|x|^2-1)) dx = 1`.
pub fn kernel_normalization(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::parameter("kernel normalization needs d >= 1"));
    }
    let dd = d as f64;
    // radial reduction: int = S_{d-1} int_0^1 r^{d-1} gamma(r) dr
    let radial = adaptive_simpson(|r| r.powf(dd - 1.0) * bump_profile(r), 0.0, 1.0, 1e-12);
    let total = unit_sphere_area(d) * radial;
    Ok(1.0 / total)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MollifierKernel {
    pub epsilon: f64,
    pub dimension: usize,
    pub normalization: f64,
}

impl MollifierKernel {
    pub fn new(dimension: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::parameter("mollifier width must be positive"));
        }
        Ok(MollifierKernel {
            epsilon,
            dimension,
            normalization: kernel_normalization(dimension)?,
        })
    }

    /// Analytic `gamma_eps(x)` at radius `r = |x|`.
    pub fn eval_radial(&self, r: f64) -> f64 {
        self.normalization * self.epsilon.powi(-(self.dimension as i32))
            * bump_profile(r / self.epsilon)
    }
}

/// Stencil of nonzero kernel weights on a grid, normalized to unit sum.
struct Stencil {
    /// (di, dj, dk, weight) with |offset| < eps
    taps: Vec<(i64, i64, i64, f64)>,
}

fn build_stencil(grid: &Grid, epsilon: f64) -> Result<Stencil> {
    let h = grid.spacing();
    if epsilon < 2.0 * h {
        return Err(Error::Resolution {
            epsilon,
            min: 2.0 * h,
        });
    }
    let m = (epsilon / h).ceil() as i64;
    let mut taps = Vec::new();
    let mut total = 0.0f64;
    for di in -m..=m {
        for dj in -m..=m {
            for dk in -m..=m {
                let r = ((di * di + dj * dj + dk * dk) as f64).sqrt() * h;
                let w = bump_profile(r / epsilon);
                if w > 0.0 {
                    taps.push((di, dj, dk, w));
                    total += w;
                }
            }
        }
    }
    for t in &mut taps {
        t.3 /= total;
    }
    Ok(Stencil { taps })
}

fn convolve(grid: &Grid, values: &[f64], st: &Stencil) -> Vec<f64> {
    let n = grid.points as i64;
    let idx = |i: i64, j: i64, k: i64| ((i * n + j) * n + k) as usize;
    let nn = grid.points;
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(nn * nn).enumerate().for_each(|(iu, slab)| {
        let i = iu as i64;
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for &(di, dj, dk, w) in &st.taps {
                    let (si, sj, sk) = (i - di, j - dj, k - dk);
                    if si >= 0 && si < n && sj >= 0 && sj < n && sk >= 0 && sk < n {
                        acc += w * values[idx(si, sj, sk)];
                    }
                }
                slab[(j * n + k) as usize] = acc;
            }
        }
    });
    out
}

/// `E_eps f` for a scalar grid field (zero extension outside the box).
pub fn mollify_scalar(f: &GridScalarField, epsilon: f64) -> Result<GridScalarField> {
    let st = build_stencil(&f.grid, epsilon)?;
    Ok(GridScalarField {
        grid: f.grid,
        values: convolve(&f.grid, &f.values, &st),
    })
}

/// Componentwise `E_eps b` for a sampled vector field.
pub fn mollify_field(b: &GridVectorField, epsilon: f64) -> Result<GridVectorField> {
    let st = build_stencil(&b.grid, epsilon)?;
    Ok(GridVectorField {
        grid: b.grid,
        components: [
            convolve(&b.grid, &b.components[0], &st),
            convolve(&b.grid, &b.components[1], &st),
            convolve(&b.grid, &b.components[2], &st),
        ],
    })
}

/// Samples a drift spec (regularized at grid scale h/2) and mollifies it.
pub fn mollify_spec(
    spec: &crate::drift::DriftSpec,
    epsilon: f64,
    grid: &Grid,
) -> Result<GridVectorField> {
    spec.validate()?;
    let sampled = spec.sample(grid, grid.spacing() / 2.0);
    mollify_field(&sampled, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_normalization_matches_direct_quadrature() {
        // independent 1-d oracle: c = 1 / int_{-1}^{1} exp(1/(t^2-1)) dt
        let direct = adaptive_simpson(bump_profile, -1.0, 1.0, 1e-13);
        let c = kernel_normalization(1).unwrap();
        assert!((c - 1.0 / direct).abs() < 1e-9 * c);
    }

    #[test]
    fn profile_vanishes_at_support_boundary() {
        assert_eq!(bump_profile(1.0), 0.0);
        assert_eq!(bump_profile(-1.0), 0.0);
        assert_eq!(bump_profile(1.7), 0.0);
        assert!(bump_profile(0.0) > 0.0);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}
