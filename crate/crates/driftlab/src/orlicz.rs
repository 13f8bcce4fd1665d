//! The Orlicz space for `Phi = cosh - 1`: modular, gauge (Luxemburg) norm,
//! and the exact embeddings into the even Lebesgue spaces.
//!
//! All integrals are with respect to the grid measure `h^d` per node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{kahan_sum, GridScalarField};

/// `Phi(t) = cosh(t) - 1`, evaluated without cancellation for small `t`.
#[inline]
pub fn phi(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        // cosh t - 1 = 2 sinh^2(t/2), exact to full precision near zero
        let s = (0.5 * t).sinh();
        2.0 * s * s
    } else {
        t.cosh() - 1.0
    }
}

/// Largest argument for which `cosh` stays inside f64 range.
const COSH_OVERFLOW: f64 = 709.0;

/// `integral Phi(|f|/c) dmu`. Falls back to a scaled (log-domain) evaluation
/// when individual terms overflow; errors when even the total does.
pub fn orlicz_modular(f: &GridScalarField, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::parameter("modular needs c > 0"));
    }
    f.validate_finite()?;
    let mu = f.grid.cell_measure();
    let max_t = f.norm_linf() / c;
    if max_t < COSH_OVERFLOW {
        return Ok(mu * kahan_sum(f.values.iter().map(|&v| phi(v / c))));
    }
    // scaled evaluation: modular = mu * e^M * sum e^{t_i - M} (1 + e^{-2 t_i}) / 2
    // minus mu * n; the subtraction is negligible at this magnitude
    let m = max_t;
    let mut s = 0.0f64;
    for &v in &f.values {
        let t = (v / c).abs();
        s += (t - m).exp() * (1.0 + (-2.0 * t).exp()) / 2.0;
    }
    let log_modular = mu.ln() + m + s.ln();
    if log_modular >= f64::MAX.ln() {
        return Err(Error::Overflow {
            context: "orlicz modular",
            max_arg: max_t,
        });
    }
    Ok(log_modular.exp() - mu * f.values.len() as f64)
}

/// Overflow-proof comparison `modular(f, c) > 1`, used inside the gauge
/// bisection so that tiny trial values of `c` never abort the search.
pub fn modular_exceeds_one(f: &GridScalarField, c: f64) -> bool {
    let max_t = f.norm_linf() / c;
    if max_t >= COSH_OVERFLOW {
        // one term alone is >= mu (cosh(709) - 1) > 1 on any grid this
        // library accepts (mu > 1e-300)
        return true;
    }
    match orlicz_modular(f, c) {
        Ok(m) => m > 1.0,
        Err(_) => true,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeNormResult {
    pub value: f64,
    /// Final bisection bracket (lo, hi); `value` is the certified upper end.
    pub bracket: (f64, f64),
    /// `modular(f, value) - 1`; at most 0 up to the bracket tolerance.
    pub residual: f64,
    pub iterations: usize,
}

pub const GAUGE_TOL: f64 = 1e-8;

/// Luxemburg gauge `inf { c > 0 : modular(f, c) <= 1 }` by bisection.
///
/// Lower bracket: `Phi(t) >= t^2 / 2` gives `modular >= ||f||_2^2 / (2 c^2)`,
/// so the gauge is at least `||f||_2 / sqrt(2)`. Upper bracket starts at
/// `10 max|f|` and widens geometrically until the modular drops below one.
pub fn gauge_norm(f: &GridScalarField) -> Result<GaugeNormResult> {
    f.validate_finite()?;
    let linf = f.norm_linf();
    if linf == 0.0 {
        return Ok(GaugeNormResult {
            value: 0.0,
            bracket: (0.0, 0.0),
            residual: -1.0,
            iterations: 0,
        });
    }
    let mut lo = f.norm_l2() / std::f64::consts::SQRT_2;
    let mut hi = 10.0 * linf;
    let mut iterations = 0usize;
    while modular_exceeds_one(f, hi) {
        hi *= 2.0;
        iterations += 1;
        if !hi.is_finite() {
            return Err(Error::Overflow {
                context: "gauge upper bracket",
                max_arg: hi,
            });
        }
    }
    if lo > hi {
        lo = 0.0;
    }
    while hi - lo > GAUGE_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if modular_exceeds_one(f, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > 10_000 {
            return Err(Error::Iteration {
                iterations,
                last_estimate: hi,
                residual: hi - lo,
            });
        }
    }
    let residual = orlicz_modular(f, hi)? - 1.0;
    Ok(GaugeNormResult {
        value: hi,
        bracket: (lo, hi),
        residual,
        iterations,
    })
}

/// `((2m)!)^{1/(2m)}`: the constant in `||f||_{2m} <= ((2m)!)^{1/2m} ||f||_Phi`,
/// exact on any measure because `t^{2m}/(2m)! <= cosh t - 1` termwise.
pub fn embedding_factor(m: usize) -> f64 {
    let mut fact = 1.0f64;
    for k in 2..=(2 * m) {
        fact *= k as f64;
    }
    fact.powf(1.0 / (2.0 * m as f64))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub m: usize,
    pub lp_norm: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `||f||_{2m} <= ((2m)!)^{1/2m} ||f||_Phi` for `m = 1..=max_m`.
pub fn embedding_check(f: &GridScalarField, max_m: usize) -> Result<Vec<EmbeddingRow>> {
    if max_m == 0 {
        return Err(Error::parameter("embedding_check needs max_m >= 1"));
    }
    let gauge = gauge_norm(f)?.value;
    let mut rows = Vec::with_capacity(max_m);
    for m in 1..=max_m {
        let p = 2.0 * m as f64;
        let lp = f.norm_lp(p);
        let bound = embedding_factor(m) * gauge;
        // zero field: both sides zero
        let pass = lp <= bound * (1.0 + 1e-12) + 1e-300;
        rows.push(EmbeddingRow {
            m,
            lp_norm: lp,
            bound,
            pass,
        });
    }
    Ok(rows)
}
