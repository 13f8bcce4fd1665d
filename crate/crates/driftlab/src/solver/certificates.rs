//! Certificate checks on a completed evolution: Lebesgue norm growth
//! bounds, smoothing-decay slopes, and the Orlicz energy inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridScalarField;
use crate::orlicz::{gauge_norm, orlicz_modular};
use crate::solver::evolve::SemigroupRun;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateRow {
    pub t: f64,
    pub norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormCertificateReport {
    /// One table per admissible exponent: `(p, rate, rows)`.
    pub tables: Vec<(f64, f64, Vec<CertificateRow>)>,
    /// Exponents below the admissible interval, reported untested.
    pub not_applicable: Vec<f64>,
    pub p_min: f64,
    pub worst_ratio: f64,
    pub pass: bool,
}

pub const NORM_CERT_SLACK: f64 = 1e-2;

/// Checks `||u(t)||_p <= e^{omega_p t} ||f||_p` for every tracked exponent
/// in the admissible interval `[2 / (2 - sqrt(delta)), inf)`. The growth
/// rate is `omega_p = c(delta) / (p sqrt(delta))`, zero when `c = 0`.
pub fn norm_certificates(run: &SemigroupRun) -> Result<NormCertificateReport> {
    let delta = run.meta.delta;
    let c = run.meta.c;
    if delta >= 4.0 {
        return Err(Error::parameter(
            "no Lebesgue certificate above the critical budget delta = 4",
        ));
    }
    let p_min = 2.0 / (2.0 - delta.sqrt());
    let mut tables = Vec::new();
    let mut not_applicable = Vec::new();
    let mut worst = 0.0f64;
    for (k, &p) in run.config.track_ps.iter().enumerate() {
        if p < p_min {
            not_applicable.push(p);
            continue;
        }
        let omega = if c == 0.0 {
            0.0
        } else if delta > 0.0 {
            c / (p * delta.sqrt())
        } else {
            return Err(Error::parameter(
                "growth rate undefined for delta = 0 with c > 0",
            ));
        };
        let f0 = run.lp_history[k][0];
        if f0 == 0.0 {
            return Err(Error::parameter("initial datum has zero norm"));
        }
        let mut rows = Vec::with_capacity(run.times.len());
        for (i, &t) in run.times.iter().enumerate() {
            let norm = run.lp_history[k][i];
            let bound = (omega * t).exp() * f0;
            let ratio = norm / bound;
            worst = worst.max(ratio);
            rows.push(CertificateRow {
                t,
                norm,
                bound,
                ratio,
            });
        }
        tables.push((p, omega, rows));
    }
    if tables.is_empty() {
        return Err(Error::parameter(
            "no tracked exponent lies in the admissible interval",
        ));
    }
    Ok(NormCertificateReport {
        tables,
        not_applicable,
        p_min,
        worst_ratio: worst,
        pass: worst <= 1.0 + NORM_CERT_SLACK,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    pub p: f64,
    pub q: f64,
    pub slope: f64,
    /// `-d/2 (1/p - 1/q)`, the heat-kernel smoothing exponent.
    pub expected: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Least-squares slope of `log ||u(t)||_q` against `log t` inside the
/// window, compared to the smoothing exponent for `p -> q`.
///
/// `q = inf` reads the sup-norm history; finite `q` must be tracked.
pub fn smoothing_slope(run: &SemigroupRun, p: f64, q: f64, window: (f64, f64)) -> Result<SlopeFit> {
    if !(p >= 1.0) || q <= p {
        return Err(Error::parameter("smoothing_slope needs 1 <= p < q"));
    }
    let history = if q.is_infinite() {
        &run.linf_history
    } else {
        let k = run
            .config
            .track_ps
            .iter()
            .position(|&r| r == q)
            .ok_or_else(|| Error::parameter("exponent q is not tracked by the run"))?;
        &run.lp_history[k]
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &t) in run.times.iter().enumerate() {
        if t >= window.0 && t <= window.1 && history[i] > 0.0 {
            xs.push(t.ln());
            ys.push(history[i].ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::parameter("fit window holds fewer than 3 samples"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    let d = 3.0;
    let qinv = if q.is_infinite() { 0.0 } else { 1.0 / q };
    Ok(SlopeFit {
        p,
        q,
        slope: sxy / sxx,
        expected: -0.5 * d * (1.0 / p - qinv),
        window,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrliczCertificateReport {
    /// Reference level: the gauge norm of the initial datum.
    pub c_star: f64,
    /// Rows `(t, lhs, rhs, slack)` of the modular-plus-energy inequality.
    pub modular_energy: Vec<(f64, f64, f64, f64)>,
    /// Rows of the plain energy inequality.
    pub energy_only: Vec<(f64, f64, f64, f64)>,
    /// Rows of the gauge quasi-contraction.
    pub quasi_contraction: Vec<(f64, f64, f64, f64)>,
    pub sup_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// The three Orlicz certificates for a damped run `v = e^{-lambda t} u`:
///
/// 1. `modular(v(t), c*) + c*^{-2} int_0^t ||grad v||_2^2 <= modular(f, c*) + t G`
/// 2. `int_0^t ||grad v||_2^2 <= (1 + t G) ||f||_Phi^2`
/// 3. `||u(t)||_Phi <= e^{(c5/2 + G) t} ||f||_Phi` (tail part added to the
///    rate when present)
///
/// with `c* = ||f||_Phi`. Slack per row is `max(0, lhs/rhs - 1)`.
pub fn orlicz_energy_certificate(
    run: &SemigroupRun,
    tolerance: f64,
) -> Result<OrliczCertificateReport> {
    if run.snapshots.len() < 2 {
        return Err(Error::parameter(
            "orlicz certificate needs snapshots; rerun with a snapshot stride",
        ));
    }
    let meta = run.meta;
    let f0 = &run.snapshots[0].1;
    let c_star = gauge_norm(f0)?.value;
    if c_star == 0.0 {
        return Err(Error::parameter("initial datum vanishes"));
    }
    let modular_f = orlicz_modular(f0, c_star)?;
    // quasi-contraction rate: the damping lambda plus the source budget
    let rate = meta.lambda + meta.g;

    let mut modular_energy = Vec::new();
    let mut energy_only = Vec::new();
    let mut quasi = Vec::new();
    let mut sup_slack = 0.0f64;
    let mut push = |rows: &mut Vec<(f64, f64, f64, f64)>, t: f64, lhs: f64, rhs: f64| {
        let slack = (lhs / rhs - 1.0).max(0.0);
        sup_slack = sup_slack.max(slack);
        rows.push((t, lhs, rhs, slack));
    };

    for (t, u) in run.snapshots.iter().skip(1) {
        let idx = run.nearest_time_index(*t);
        let energy = run.energy_cumulative[idx];
        let damp = (-meta.lambda * t).exp();
        let v = u.scaled(damp);
        let modular_v = orlicz_modular(&v, c_star)?;
        push(
            &mut modular_energy,
            *t,
            modular_v + energy / (c_star * c_star),
            modular_f + t * meta.g,
        );
        push(
            &mut energy_only,
            *t,
            energy,
            (1.0 + t * meta.g) * c_star * c_star,
        );
        let gauge_u = gauge_norm(u)?.value;
        push(&mut quasi, *t, gauge_u, (rate * t).exp() * c_star);
    }

    Ok(OrliczCertificateReport {
        c_star,
        modular_energy,
        energy_only,
        quasi_contraction: quasi,
        sup_slack,
        tolerance,
        pass: sup_slack <= tolerance,
    })
}

impl GridScalarField {
    /// Pointwise scaling, used for the damped solution `e^{-lambda t} u`.
    pub fn scaled(&self, factor: f64) -> GridScalarField {
        GridScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}
