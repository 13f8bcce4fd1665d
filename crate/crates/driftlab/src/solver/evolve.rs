//! IMEX time stepping for `du/dt = Lap u - b . grad u` with zero Dirichlet
//! data: explicit first-order upwind advection, implicit Euler diffusion.
//!
//! Under the l1 CFL condition `tau * max_x sum_i |b_i| / h <= 1` the
//! advection half-step is a convex combination of neighbor values, and the
//! implicit diffusion solve is an M-matrix inverse, so each full step
//! preserves positivity and is non-expanding in the sup norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    apply_neg_laplacian_raw, apply_upwind_advection, Grid, GridScalarField, GridVectorField,
};
use crate::linalg::{conjugate_gradient, LinOp};
use crate::orlicz::gauge_norm;

/// `(I + tau (-Lap))` for the implicit diffusion solve.
struct DiffusionOp<'a> {
    grid: &'a Grid,
    tau: f64,
}

impl LinOp for DiffusionOp<'_> {
    fn size(&self) -> usize {
        self.grid.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        apply_neg_laplacian_raw(self.grid, x, y);
        for i in 0..x.len() {
            y[i] = x[i] + self.tau * y[i];
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub tau: f64,
    pub t_final: f64,
    /// Relative tolerance of the inner conjugate-gradient solves.
    pub lin_tol: f64,
    /// Keep a full field snapshot every this many steps (0: endpoints only).
    pub snapshot_stride: usize,
    /// Finite Lebesgue exponents tracked at every step; the sup norm is
    /// always tracked separately.
    pub track_ps: Vec<f64>,
    /// Evaluate the Orlicz gauge every this many steps (0: endpoints only).
    pub gauge_stride: usize,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.t_final > 0.0) {
            return Err(Error::config("tau and t_final must be positive"));
        }
        if self.tau > self.t_final {
            return Err(Error::config("tau exceeds t_final"));
        }
        if !(self.lin_tol > 0.0 && self.lin_tol < 1.0) {
            return Err(Error::config("lin_tol must lie in (0, 1)"));
        }
        for &p in &self.track_ps {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::config("tracked exponents must be finite and >= 1"));
            }
        }
        Ok(())
    }
}

/// Constants of the energy certificates, fixed before a run.
///
/// For a drift supported in `B_R` that is form-bounded with budget 4 and
/// constant `c4`, the analysis gives `c5 = c4 + 4 (d-1) / R^2`, weight
/// plateau ratio `a = 1 + 1/theta`, damping `lambda`, and source budget
/// `G = c5 |B_{aR}|`. A bounded tail outside `B_R` adds `|tail|_inf^2 / 2`
/// to `lambda` and `|tail|_2^2` to `G`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DriftMeta {
    pub delta: f64,
    pub c: f64,
    pub support_radius: f64,
    pub theta: f64,
    pub a: f64,
    pub c5: f64,
    pub lambda: f64,
    pub g: f64,
    pub tail_sup: f64,
    pub tail_l2: f64,
}

impl DriftMeta {
    /// Certificate constants for a compactly supported drift, no tail.
    pub fn compact(d: usize, delta: f64, c4: f64, support_radius: f64, theta: f64) -> Result<Self> {
        if d < 3 || !(support_radius > 0.0) || !(theta > 0.0 && theta < 0.5) {
            return Err(Error::parameter(
                "compact drift meta needs d >= 3, R > 0, theta in (0, 1/2)",
            ));
        }
        let a = 1.0 + 1.0 / theta;
        let c5 = c4 + 4.0 * (d as f64 - 1.0) / (support_radius * support_radius);
        let ar = a * support_radius;
        let g = c5 * std::f64::consts::PI * 4.0 / 3.0 * ar * ar * ar;
        Ok(DriftMeta {
            delta,
            c: c4,
            support_radius,
            theta,
            a,
            c5,
            lambda: 0.5 * c5,
            g,
            tail_sup: 0.0,
            tail_l2: 0.0,
        })
    }

    /// Adds a bounded-tail part with the given sup and L2 norms.
    pub fn with_tail(mut self, tail_sup: f64, tail_l2: f64) -> Self {
        self.tail_sup = tail_sup;
        self.tail_l2 = tail_l2;
        self.lambda = 0.5 * self.c5 + 0.5 * tail_sup * tail_sup;
        self.g += tail_l2 * tail_l2;
        self
    }

    /// Trivial meta (zero drift): all certificate constants vanish.
    pub fn free() -> Self {
        DriftMeta {
            delta: 0.0,
            c: 0.0,
            support_radius: 0.0,
            theta: 0.25,
            a: 5.0,
            c5: 0.0,
            lambda: 0.0,
            g: 0.0,
            tail_sup: 0.0,
            tail_l2: 0.0,
        }
    }
}

/// One IMEX evolution, single step at a time; [`evolve`] drives it, and the
/// Cauchy comparison runs several of them in lockstep.
pub struct Stepper<'a> {
    pub grid: Grid,
    b: &'a GridVectorField,
    pub tau: f64,
    lin_tol: f64,
    pub u: Vec<f64>,
    pub t: f64,
    pub steps: usize,
    advected: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        b: &'a GridVectorField,
        f0: &GridScalarField,
        tau: f64,
        lin_tol: f64,
    ) -> Result<Self> {
        b.grid.ensure_same(&f0.grid)?;
        b.validate_finite()?;
        f0.validate_finite()?;
        let grid = b.grid;
        let h = grid.spacing();
        let cfl = tau * b.max_l1_magnitude() / h;
        if cfl > 1.0 {
            return Err(Error::config(format!(
                "advection CFL violated: tau sum|b_i|/h = {cfl:.3e} > 1"
            )));
        }
        Ok(Stepper {
            grid,
            b,
            tau,
            lin_tol,
            u: f0.values.clone(),
            t: 0.0,
            steps: 0,
            advected: vec![0.0; grid.len()],
        })
    }

    pub fn step(&mut self) -> Result<()> {
        apply_upwind_advection(&self.grid, self.b, &self.u, &mut self.advected);
        for i in 0..self.u.len() {
            self.advected[i] = self.u[i] - self.tau * self.advected[i];
        }
        let op = DiffusionOp {
            grid: &self.grid,
            tau: self.tau,
        };
        // warm start from the advected state; the diffusion update is a
        // small correction of it
        self.u.copy_from_slice(&self.advected);
        conjugate_gradient(&op, &self.advected, &mut self.u, self.lin_tol, 100_000)?;
        self.steps += 1;
        self.t = self.steps as f64 * self.tau;
        Ok(())
    }

    pub fn field(&self) -> GridScalarField {
        GridScalarField {
            grid: self.grid,
            values: self.u.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemigroupRun {
    pub config: EvolutionConfig,
    pub meta: DriftMeta,
    pub steps: usize,
    /// Time at every recorded step, starting with 0.
    pub times: Vec<f64>,
    /// One history per entry of `config.track_ps`, aligned with `times`.
    pub lp_history: Vec<Vec<f64>>,
    pub linf_history: Vec<f64>,
    /// Sparse `(t, gauge norm of u)` samples.
    pub gauge_history: Vec<(f64, f64)>,
    /// Cumulative `int_0^t e^{-2 lambda s} ||grad u(s)||_2^2 ds` by the
    /// trapezoid rule, aligned with `times`; this is the Dirichlet energy
    /// of the damped solution `v = e^{-lambda t} u`.
    pub energy_cumulative: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Vec<(f64, GridScalarField)>,
    /// Worst overshoot of the initial bounds `[min(f0, 0), max(f0, 0)]`,
    /// relative to `||f0||_inf`.
    pub max_principle_violation: f64,
}

impl SemigroupRun {
    /// History index of the snapshot closest to `t`.
    pub fn nearest_time_index(&self, t: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &s) in self.times.iter().enumerate() {
            let d = (s - t).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Runs the IMEX scheme to `t_final` and records the norm histories, the
/// damped cumulative Dirichlet energy, and field snapshots.
pub fn evolve(
    b: &GridVectorField,
    f0: &GridScalarField,
    config: &EvolutionConfig,
    meta: DriftMeta,
) -> Result<SemigroupRun> {
    config.validate()?;
    let mut stepper = Stepper::new(b, f0, config.tau, config.lin_tol)?;
    let n_steps = (config.t_final / config.tau).round() as usize;
    if n_steps == 0 {
        return Err(Error::config("no steps: t_final / tau rounds to zero"));
    }

    let (min0, max0) = f0.min_max();
    let upper = max0.max(0.0);
    let lower = min0.min(0.0);
    let scale = f0.norm_linf().max(f64::MIN_POSITIVE);

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut lp_history: Vec<Vec<f64>> = config.track_ps.iter().map(|_| Vec::new()).collect();
    let mut linf_history = Vec::new();
    let mut gauge_history = Vec::new();
    let mut energy_cumulative = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    let mut violation = 0.0f64;

    let record = |u: &GridScalarField,
                  t: f64,
                  lp: &mut Vec<Vec<f64>>,
                  linf: &mut Vec<f64>,
                  times: &mut Vec<f64>| {
        times.push(t);
        for (k, &p) in config.track_ps.iter().enumerate() {
            lp[k].push(u.norm_lp(p));
        }
        linf.push(u.norm_linf());
    };

    let mut u = f0.clone();
    record(&u, 0.0, &mut lp_history, &mut linf_history, &mut times);
    let damped_energy = |u: &GridScalarField, t: f64| -> f64 {
        (-2.0 * meta.lambda * t).exp() * u.dirichlet_energy()
    };
    let mut g_prev = damped_energy(&u, 0.0);
    energy_cumulative.push(0.0);
    gauge_history.push((0.0, gauge_norm(&u)?.value));
    snapshots.push((0.0, u.clone()));

    for n in 1..=n_steps {
        stepper.step()?;
        u = stepper.field();
        let t = stepper.t;
        record(&u, t, &mut lp_history, &mut linf_history, &mut times);
        let (mn, mx) = u.min_max();
        violation = violation.max(((mx - upper).max(lower - mn)).max(0.0) / scale);
        let g = damped_energy(&u, t);
        let e = energy_cumulative[n - 1] + 0.5 * config.tau * (g_prev + g);
        energy_cumulative.push(e);
        g_prev = g;
        let last = n == n_steps;
        if last || (config.gauge_stride > 0 && n % config.gauge_stride == 0) {
            gauge_history.push((t, gauge_norm(&u)?.value));
        }
        if last || (config.snapshot_stride > 0 && n % config.snapshot_stride == 0) {
            snapshots.push((t, u.clone()));
        }
    }

    Ok(SemigroupRun {
        config: config.clone(),
        meta,
        steps: n_steps,
        times,
        lp_history,
        linf_history,
        gauge_history,
        energy_cumulative,
        snapshots,
        max_principle_violation: violation,
    })
}
