//! The stationary problem `(mu - Lap + b . grad) u = f` on the Dirichlet
//! box.
//!
//! The advection term is discretized upwind, so the system matrix is an
//! M-matrix with strictly dominant diagonal `mu + 6/h^2 + sum |b_i|/h`.
//! That gives `f >= 0 => u >= 0` and `||mu u||_inf <= ||f||_inf` at the
//! discrete level, the two structural facts the approximation theory needs.

use crate::error::{Error, Result};
use crate::grid::{
    apply_neg_laplacian_raw, apply_upwind_advection, Grid, GridScalarField, GridVectorField,
};
use crate::linalg::{bicgstab, LinOp, SolveStats};

/// `(mu - Lap + b . grad)` as a matrix-free operator.
pub struct ResolventOp<'a> {
    pub grid: &'a Grid,
    pub b: &'a GridVectorField,
    pub mu: f64,
}

impl LinOp for ResolventOp<'_> {
    fn size(&self) -> usize {
        self.grid.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        apply_neg_laplacian_raw(self.grid, x, y);
        let mut adv = vec![0.0; x.len()];
        apply_upwind_advection(self.grid, self.b, x, &mut adv);
        for i in 0..x.len() {
            y[i] += self.mu * x[i] + adv[i];
        }
    }
}

/// Solves `(mu - Lap + b . grad) u = f` to `||residual||_2 <= tol ||f||_2`.
pub fn solve_resolvent(
    b: &GridVectorField,
    mu: f64,
    f: &GridScalarField,
    tol: f64,
) -> Result<(GridScalarField, SolveStats)> {
    b.grid.ensure_same(&f.grid)?;
    b.validate_finite()?;
    f.validate_finite()?;
    if !(mu > 0.0) {
        return Err(Error::parameter("resolvent needs mu > 0"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::parameter("resolvent tolerance must lie in (0, 1)"));
    }
    let op = ResolventOp {
        grid: &b.grid,
        b,
        mu,
    };
    // warm start from the zeroth-order guess f / mu
    let mut u: Vec<f64> = f.values.iter().map(|v| v / mu).collect();
    let stats = bicgstab(&op, &f.values, &mut u, tol, 200_000)?;
    Ok((
        GridScalarField {
            grid: b.grid,
            values: u,
        },
        stats,
    ))
}

/// `||mu (mu + Lambda)^{-1} g||_inf / ||g||_inf` for one `(mu, g)` pair.
pub fn resolvent_contraction(
    b: &GridVectorField,
    mu: f64,
    g: &GridScalarField,
    tol: f64,
) -> Result<f64> {
    let (u, _) = solve_resolvent(b, mu, g, tol)?;
    let denom = g.norm_linf();
    if denom == 0.0 {
        return Err(Error::parameter("contraction ratio needs g != 0"));
    }
    Ok(mu * u.norm_linf() / denom)
}
