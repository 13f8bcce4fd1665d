//! Uniform cubic grid on `[-L, L]^3` with Dirichlet-zero boundary.
//!
//! The discrete model of whole space used throughout: all `N^3` nodes carry
//! unknowns, and every stencil sees zero ghost values one spacing outside the
//! box (Dirichlet at the virtual layer). The forward-difference Dirichlet
//! energy includes those boundary edges, which makes
//! `<f, -Lap f> = dirichlet_energy(f)` an exact identity rather than an
//! approximation; several certificates rely on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Spatial dimension; field storage is implemented for d = 3.
    pub dimension: usize,
    /// Box half-width L: nodes span [-L, L] per axis.
    pub half_width: f64,
    /// Points per axis N (spacing h = 2L/(N-1)).
    pub points: usize,
}

impl Grid {
    pub fn new(dimension: usize, half_width: f64, points: usize) -> Result<Self> {
        if dimension != 3 {
            return Err(Error::parameter(format!(
                "grid fields are implemented for d = 3, got d = {dimension}"
            )));
        }
        if points < 16 {
            return Err(Error::parameter(format!(
                "grid needs N >= 16 points per axis, got {points}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::parameter(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Grid {
            dimension,
            half_width,
            points,
        })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points as f64 - 1.0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points * self.points * self.points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integration weight of one cell, h^d.
    #[inline]
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.points + j) * self.points + k
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn point_of_index(&self, idx: usize) -> [f64; 3] {
        let n = self.points;
        let k = idx % n;
        let j = (idx / n) % n;
        let i = idx / (n * n);
        self.point(i, j, k)
    }

    /// Node nearest to `x` (clamped into the box).
    pub fn nearest_index(&self, x: [f64; 3]) -> usize {
        let n = self.points as isize;
        let h = self.spacing();
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let raw = ((x[a] + self.half_width) / h).round() as isize;
            ijk[a] = raw.clamp(0, n - 1) as usize;
        }
        self.index(ijk[0], ijk[1], ijk[2])
    }

    /// Checks the two grids describe the same discretization.
    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::config(format!(
                "grid mismatch: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// Scalar field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Vector field sampled on a [`Grid`], stored as three component planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridVectorField {
    pub grid: Grid,
    pub components: [Vec<f64>; 3],
}

impl GridScalarField {
    pub fn zeros(grid: Grid) -> Self {
        GridScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let n = grid.points;
        let mut values = vec![0.0; grid.len()];
        values
            .par_chunks_mut(n * n)
            .enumerate()
            .for_each(|(i, slab)| {
                for j in 0..n {
                    for k in 0..n {
                        slab[j * n + k] = f(grid.point(i, j, k));
                    }
                }
            });
        GridScalarField { grid, values }
    }

    pub fn validate_finite(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation("values", format!("non-finite entry {v}")));
        }
        Ok(())
    }

    /// Grid quadrature `<f> = h^3 sum f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_measure() * kahan_sum(self.values.iter().copied())
    }

    /// `<f g> = h^3 sum f g`.
    pub fn inner(&self, other: &GridScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.cell_measure()
            * kahan_sum(
                self.values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| a * b),
            )
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell_measure() * kahan_sum(self.values.iter().map(|v| v * v))).sqrt()
    }

    /// `||f||_p` with the grid measure; `p = +inf` is the max norm.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_linf();
        }
        assert!(p >= 1.0, "Lp norm needs p >= 1, got {p}");
        if p == 1.0 {
            return self.grid.cell_measure() * kahan_sum(self.values.iter().map(|v| v.abs()));
        }
        if p == 2.0 {
            return self.norm_l2();
        }
        let s = kahan_sum(self.values.iter().map(|v| v.abs().powf(p)));
        (self.grid.cell_measure() * s).powf(1.0 / p)
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), &v| (lo.min(v), hi.max(v)),
        )
    }

    /// Forward-difference Dirichlet energy `||grad f||_2^2` with zero
    /// extension: all interior forward edges plus one boundary edge per face
    /// node. Equals `<f, -Lap f>` exactly.
    pub fn dirichlet_energy(&self) -> f64 {
        let n = self.grid.points;
        let h = self.grid.spacing();
        let v = &self.values;
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        let partial: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0f64;
                for j in 0..n {
                    for k in 0..n {
                        let c = v[idx(i, j, k)];
                        // forward neighbor or zero ghost, per axis
                        let xn = if i + 1 < n { v[idx(i + 1, j, k)] } else { 0.0 };
                        let yn = if j + 1 < n { v[idx(i, j + 1, k)] } else { 0.0 };
                        let zn = if k + 1 < n { v[idx(i, j, k + 1)] } else { 0.0 };
                        let dx = xn - c;
                        let dy = yn - c;
                        let dz = zn - c;
                        acc += dx * dx + dy * dy + dz * dz;
                        // backward ghost edges at the low faces
                        if i == 0 {
                            acc += c * c;
                        }
                        if j == 0 {
                            acc += c * c;
                        }
                        if k == 0 {
                            acc += c * c;
                        }
                    }
                }
                acc
            })
            .collect();
        let h3 = self.grid.cell_measure();
        h3 / (h * h) * kahan_sum(partial.into_iter())
    }

    /// Energy of the difference `f - g` without materializing it.
    pub fn dirichlet_energy_diff(&self, other: &GridScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        dirichlet_energy_diff_raw(&self.grid, &self.values, &other.values)
    }
    /// `-Lap_h f` with the 7-point stencil and zero extension.
    pub fn apply_neg_laplacian(&self, out: &mut [f64]) {
        apply_neg_laplacian_raw(&self.grid, &self.values, out);
    }

    /// Centered gradient component along `axis`, O(h^2) in the interior,
    /// one-sided against the zero ghost at the faces.
    pub fn gradient_centered(&self, axis: usize) -> Vec<f64> {
        let n = self.grid.points;
        let h = self.grid.spacing();
        let v = &self.values;
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        let mut out = vec![0.0; v.len()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (lo, hi) = match axis {
                        0 => (
                            if i > 0 { v[idx(i - 1, j, k)] } else { 0.0 },
                            if i + 1 < n { v[idx(i + 1, j, k)] } else { 0.0 },
                        ),
                        1 => (
                            if j > 0 { v[idx(i, j - 1, k)] } else { 0.0 },
                            if j + 1 < n { v[idx(i, j + 1, k)] } else { 0.0 },
                        ),
                        2 => (
                            if k > 0 { v[idx(i, j, k - 1)] } else { 0.0 },
                            if k + 1 < n { v[idx(i, j, k + 1)] } else { 0.0 },
                        ),
                        _ => panic!("axis out of range"),
                    };
                    out[idx(i, j, k)] = (hi - lo) / (2.0 * h);
                }
            }
        }
        out
    }

    /// Multilinear interpolation at an arbitrary point of the box
    /// (zero outside).
    pub fn interpolate(&self, x: [f64; 3]) -> f64 {
        interpolate_raw(&self.grid, &self.values, x)
    }
}

impl GridVectorField {
    pub fn zeros(grid: Grid) -> Self {
        GridVectorField {
            grid,
            components: [
                vec![0.0; grid.len()],
                vec![0.0; grid.len()],
                vec![0.0; grid.len()],
            ],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        let n = grid.points;
        let rows: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let k = idx % n;
                let j = (idx / n) % n;
                let i = idx / (n * n);
                f(grid.point(i, j, k))
            })
            .collect();
        let mut out = GridVectorField::zeros(grid);
        for (idx, row) in rows.into_iter().enumerate() {
            out.components[0][idx] = row[0];
            out.components[1][idx] = row[1];
            out.components[2][idx] = row[2];
        }
        out
    }

    pub fn validate_finite(&self) -> Result<()> {
        for (a, comp) in self.components.iter().enumerate() {
            if let Some(v) = comp.iter().find(|v| !v.is_finite()) {
                return Err(Error::validation(
                    format!("components[{a}]"),
                    format!("non-finite entry {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Pointwise squared magnitude `|b|^2` as a scalar field.
    pub fn magnitude_squared(&self) -> GridScalarField {
        let mut values = vec![0.0; self.grid.len()];
        for idx in 0..values.len() {
            let bx = self.components[0][idx];
            let by = self.components[1][idx];
            let bz = self.components[2][idx];
            values[idx] = bx * bx + by * by + bz * bz;
        }
        GridScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                let bx = self.components[0][idx];
                let by = self.components[1][idx];
                let bz = self.components[2][idx];
                (bx * bx + by * by + bz * bz).sqrt()
            })
            .fold(0.0_f64, f64::max)
    }

    /// Max over nodes of `sum_i |b_i|`, the quantity in the l1 CFL condition.
    pub fn max_l1_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                self.components[0][idx].abs()
                    + self.components[1][idx].abs()
                    + self.components[2][idx].abs()
            })
            .fold(0.0_f64, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self
            .components
            .iter()
            .map(|c| kahan_sum(c.iter().map(|v| v * v)))
            .sum();
        (self.grid.cell_measure() * s).sqrt()
    }

    pub fn interpolate(&self, x: [f64; 3]) -> [f64; 3] {
        [
            interpolate_raw(&self.grid, &self.components[0], x),
            interpolate_raw(&self.grid, &self.components[1], x),
            interpolate_raw(&self.grid, &self.components[2], x),
        ]
    }
}

/// `-Lap_h` on raw storage (callers guarantee matching layouts).
pub(crate) fn apply_neg_laplacian_raw(grid: &Grid, v: &[f64], out: &mut [f64]) {
    let n = grid.points;
    let h2 = grid.spacing() * grid.spacing();
    out.par_chunks_mut(n * n).enumerate().for_each(|(i, slab)| {
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        for j in 0..n {
            for k in 0..n {
                let c = v[idx(i, j, k)];
                let mut acc = 6.0 * c;
                if i > 0 {
                    acc -= v[idx(i - 1, j, k)];
                }
                if i + 1 < n {
                    acc -= v[idx(i + 1, j, k)];
                }
                if j > 0 {
                    acc -= v[idx(i, j - 1, k)];
                }
                if j + 1 < n {
                    acc -= v[idx(i, j + 1, k)];
                }
                if k > 0 {
                    acc -= v[idx(i, j, k - 1)];
                }
                if k + 1 < n {
                    acc -= v[idx(i, j, k + 1)];
                }
                slab[j * n + k] = acc / h2;
            }
        }
    });
}

/// Dirichlet energy of `a - b` on raw storage, same edge set as
/// [`GridScalarField::dirichlet_energy`].
pub fn dirichlet_energy_diff_raw(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let n = grid.points;
    let h = grid.spacing();
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0f64;
            for j in 0..n {
                for k in 0..n {
                    let c = a[idx(i, j, k)] - b[idx(i, j, k)];
                    let xn = if i + 1 < n {
                        a[idx(i + 1, j, k)] - b[idx(i + 1, j, k)]
                    } else {
                        0.0
                    };
                    let yn = if j + 1 < n {
                        a[idx(i, j + 1, k)] - b[idx(i, j + 1, k)]
                    } else {
                        0.0
                    };
                    let zn = if k + 1 < n {
                        a[idx(i, j, k + 1)] - b[idx(i, j, k + 1)]
                    } else {
                        0.0
                    };
                    let dx = xn - c;
                    let dy = yn - c;
                    let dz = zn - c;
                    acc += dx * dx + dy * dy + dz * dz;
                    if i == 0 {
                        acc += c * c;
                    }
                    if j == 0 {
                        acc += c * c;
                    }
                    if k == 0 {
                        acc += c * c;
                    }
                }
            }
            acc
        })
        .collect();
    let h3 = grid.cell_measure();
    h3 / (h * h) * kahan_sum(partial.into_iter())
}

/// First-order upwind `b . grad_h u`: backward difference where the component
/// is positive, forward where negative. Zero ghosts outside the box.
pub(crate) fn apply_upwind_advection(grid: &Grid, b: &GridVectorField, u: &[f64], out: &mut [f64]) {
    let n = grid.points;
    let h = grid.spacing();
    let bx = &b.components[0];
    let by = &b.components[1];
    let bz = &b.components[2];
    out.par_chunks_mut(n * n).enumerate().for_each(|(i, slab)| {
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
        for j in 0..n {
            for k in 0..n {
                let id = idx(i, j, k);
                let c = u[id];
                let up = |coef: f64, lo: f64, hi: f64| {
                    if coef > 0.0 {
                        coef * (c - lo) / h
                    } else {
                        coef * (hi - c) / h
                    }
                };
                let xl = if i > 0 { u[idx(i - 1, j, k)] } else { 0.0 };
                let xh = if i + 1 < n { u[idx(i + 1, j, k)] } else { 0.0 };
                let yl = if j > 0 { u[idx(i, j - 1, k)] } else { 0.0 };
                let yh = if j + 1 < n { u[idx(i, j + 1, k)] } else { 0.0 };
                let zl = if k > 0 { u[idx(i, j, k - 1)] } else { 0.0 };
                let zh = if k + 1 < n { u[idx(i, j, k + 1)] } else { 0.0 };
                slab[j * n + k] = up(bx[id], xl, xh) + up(by[id], yl, yh) + up(bz[id], zl, zh);
            }
        }
    });
}

fn interpolate_raw(grid: &Grid, values: &[f64], x: [f64; 3]) -> f64 {
    let n = grid.points;
    let h = grid.spacing();
    let l = grid.half_width;
    // cell coordinates, zero outside the box
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..3 {
        let t = (x[a] + l) / h;
        if t < 0.0 || t > (n - 1) as f64 {
            return 0.0;
        }
        let i0 = t.floor() as usize;
        let i0 = i0.min(n - 2);
        base[a] = i0;
        frac[a] = t - i0 as f64;
    }
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut acc = 0.0;
    for (di, wi) in [(0usize, 1.0 - frac[0]), (1, frac[0])] {
        for (dj, wj) in [(0usize, 1.0 - frac[1]), (1, frac[1])] {
            for (dk, wk) in [(0usize, 1.0 - frac[2]), (1, frac[2])] {
                acc += wi
                    * wj
                    * wk
                    * values[idx(base[0] + di, base[1] + dj, base[2] + dk)];
            }
        }
    }
    acc
}

/// Neumaier-compensated serial sum. Deterministic regardless of thread count,
/// which the reproducibility contract requires of every reduction.
pub fn kahan_sum(iter: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_matches_quadratic_form() {
        let grid = Grid::new(3, 1.0, 16).unwrap();
        let f = GridScalarField::from_fn(grid, |p| (p[0] + 0.3) * p[1] - p[2] * p[2]);
        let mut lap = vec![0.0; grid.len()];
        f.apply_neg_laplacian(&mut lap);
        let quad: f64 = grid.cell_measure()
            * f.values
                .iter()
                .zip(&lap)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let energy = f.dirichlet_energy();
        assert!(
            (quad - energy).abs() <= 1e-10 * energy.abs().max(1.0),
            "quad {quad} vs energy {energy}"
        );
    }

    #[test]
    fn interpolation_reproduces_nodes_and_linear_fields() {
        let grid = Grid::new(3, 1.0, 17).unwrap();
        let f = GridScalarField::from_fn(grid, |p| 2.0 * p[0] - p[1] + 0.5 * p[2]);
        // node reproduction
        let p = grid.point(3, 5, 7);
        assert!((f.interpolate(p) - f.values[grid.index(3, 5, 7)]).abs() < 1e-14);
        // multilinear exactness on affine fields
        let q = [0.123, -0.456, 0.789];
        assert!((f.interpolate(q) - (2.0 * q[0] - q[1] + 0.5 * q[2])).abs() < 1e-12);
        // outside the box
        assert_eq!(f.interpolate([2.0, 0.0, 0.0]), 0.0);
    }
}
