//! Drift field families and their evaluation.
//!
//! All families share the convention that the PDE operator is
//! `-Lap + b . grad` while the associated SDE is `dX = -b(X) dt + sqrt(2) dB`.
//! Consequently the Hardy field with sign `+` points away from the origin and
//! its SDE drift `-b` pulls paths inward: sign `+` is the attracting case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridVectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Whether the SDE drift `-b` points toward the origin.
    pub fn is_attracting(self) -> bool {
        matches!(self, Sign::Plus)
    }
}

/// One compactly supported Hardy-type bump `sqrt(delta)/2 (d-2) 1_{B(x_m,R_m)} (x-x_m)/|x-x_m|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 3],
    pub radius: f64,
    pub delta: f64,
    /// Declared c(delta_m) of the bump.
    #[serde(default)]
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DriftFamily {
    /// `b(x) = sign sqrt(delta) (d-2)/2 |x|^{-2} x` (delta from `declared_delta`).
    Hardy { sign: Sign },
    /// The Hardy field truncated to `B_{r1}` and delta-scaled:
    /// `sqrt(delta)/2 (d-2) 1_{B_{r1}} |x|^{-2} x`.
    CompactHardy { r1: f64 },
    /// Critical core plus integrable tail:
    /// `(d-2) 1_{B_r} |x|^{-2} x + tail_c 1_{B_r^c} |x|^{-alpha-1} x`, alpha > d/2.
    TailDecay { tail_c: f64, alpha: f64, r: f64 },
    /// Disjointly supported compact Hardy bumps.
    MultiBump { bumps: Vec<Bump> },
    /// Arbitrary sampled field, evaluated by multilinear interpolation.
    GridSampled { field: GridVectorField },
}

/// A drift field together with its declared form-bound metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    #[serde(rename = "d")]
    pub dimension: usize,
    #[serde(flatten)]
    pub family: DriftFamily,
    #[serde(rename = "delta")]
    pub declared_delta: f64,
    #[serde(rename = "c", default)]
    pub declared_c: f64,
    #[serde(rename = "support", default, skip_serializing_if = "Option::is_none")]
    pub support_radius: Option<f64>,
}

impl DriftSpec {
    pub fn hardy(dimension: usize, delta: f64, sign: Sign) -> Result<Self> {
        let spec = DriftSpec {
            dimension,
            family: DriftFamily::Hardy { sign },
            declared_delta: delta,
            declared_c: 0.0,
            support_radius: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn compact_hardy(dimension: usize, delta: f64, r1: f64) -> Result<Self> {
        let spec = DriftSpec {
            dimension,
            family: DriftFamily::CompactHardy { r1 },
            declared_delta: delta,
            declared_c: 0.0,
            support_radius: Some(r1),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 3 {
            return Err(Error::parameter(format!(
                "drift families need d >= 3, got {}",
                self.dimension
            )));
        }
        if !(0.0..=4.0).contains(&self.declared_delta) {
            return Err(Error::validation(
                "delta",
                format!("declared delta must lie in [0, 4], got {}", self.declared_delta),
            ));
        }
        match &self.family {
            DriftFamily::Hardy { .. } => {}
            DriftFamily::CompactHardy { r1 } => {
                if !(*r1 > 0.0) {
                    return Err(Error::validation("r1", "support radius must be positive"));
                }
            }
            DriftFamily::TailDecay { alpha, r, .. } => {
                if !(*alpha > self.dimension as f64 / 2.0) {
                    return Err(Error::validation(
                        "alpha",
                        format!("tail exponent must exceed d/2 = {}", self.dimension as f64 / 2.0),
                    ));
                }
                if !(*r > 0.0) {
                    return Err(Error::validation("r", "core radius must be positive"));
                }
            }
            DriftFamily::MultiBump { bumps } => {
                let total: f64 = bumps.iter().map(|b| b.delta).sum();
                if total > 4.0 + 1e-12 {
                    return Err(Error::validation(
                        "bumps",
                        format!("sum of bump deltas must be <= 4, got {total}"),
                    ));
                }
                for b in bumps {
                    if !(b.radius > 0.0) || b.delta < 0.0 {
                        return Err(Error::validation("bumps", "bump needs radius > 0, delta >= 0"));
                    }
                }
                for (i, a) in bumps.iter().enumerate() {
                    for b in bumps.iter().skip(i + 1) {
                        let d2: f64 = (0..3)
                            .map(|k| (a.center[k] - b.center[k]).powi(2))
                            .sum();
                        if d2.sqrt() < a.radius + b.radius {
                            return Err(Error::validation(
                                "bumps",
                                "bump supports must be pairwise disjoint",
                            ));
                        }
                    }
                }
            }
            DriftFamily::GridSampled { field } => field.validate_finite()?,
        }
        Ok(())
    }

    /// Exact evaluation; errors at an unregularized singularity.
    pub fn eval(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        match self.eval_regularized(x, 0.0) {
            v if v.iter().all(|c| c.is_finite()) => Ok(v),
            _ => Err(Error::Singularity { point: x.to_vec() }),
        }
    }

    /// Evaluation with `|x|` replaced by `max(|x|, cap)` at the singular
    /// families; the PDE solver always passes `cap = h/2`.
    pub fn eval_regularized(&self, x: [f64; 3], cap: f64) -> [f64; 3] {
        let d = self.dimension as f64;
        match &self.family {
            DriftFamily::Hardy { sign } => {
                let coef = sign.factor() * self.declared_delta.sqrt() * (d - 2.0) / 2.0;
                radial(x, cap, |r| coef / (r * r))
            }
            DriftFamily::CompactHardy { r1 } => {
                let coef = self.declared_delta.sqrt() / 2.0 * (d - 2.0);
                let r1 = *r1;
                radial(x, cap, |r| if r <= r1 { coef / (r * r) } else { 0.0 })
            }
            DriftFamily::TailDecay { tail_c, alpha, r } => {
                let (c, a, rc) = (*tail_c, *alpha, *r);
                radial(x, cap, |rr| {
                    if rr <= rc {
                        (d - 2.0) / (rr * rr)
                    } else {
                        c * rr.powf(-a - 1.0)
                    }
                })
            }
            DriftFamily::MultiBump { bumps } => {
                let mut out = [0.0; 3];
                for b in bumps {
                    let y = [
                        x[0] - b.center[0],
                        x[1] - b.center[1],
                        x[2] - b.center[2],
                    ];
                    let coef = b.delta.sqrt() / 2.0 * (d - 2.0);
                    let rad = b.radius;
                    let v = radial(y, cap, |r| if r <= rad { coef / (r * r) } else { 0.0 });
                    for k in 0..3 {
                        out[k] += v[k];
                    }
                }
                out
            }
            DriftFamily::GridSampled { field } => field.interpolate(x),
        }
    }

    /// Samples the regularized field at every grid node.
    pub fn sample(&self, grid: &Grid, cap: f64) -> GridVectorField {
        GridVectorField::from_fn(*grid, |x| self.eval_regularized(x, cap))
    }

    /// Radius beyond which the field vanishes, when one exists.
    pub fn effective_support(&self) -> Option<f64> {
        match &self.family {
            DriftFamily::CompactHardy { r1 } => Some(*r1),
            DriftFamily::MultiBump { bumps } => bumps
                .iter()
                .map(|b| {
                    let c = (b.center.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    c + b.radius
                })
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v)))),
            _ => self.support_radius,
        }
    }
}

/// Evaluates `g(max(|x|,cap)) * x`; the coefficient function acts on the
/// regularized radius while the direction keeps the exact `x`.
#[inline]
fn radial(x: [f64; 3], cap: f64, g: impl Fn(f64) -> f64) -> [f64; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let rr = r.max(cap);
    if rr == 0.0 {
        // only reachable with cap = 0 at the origin; caller maps inf to error
        return [f64::INFINITY; 3];
    }
    let g = g(rr);
    [g * x[0], g * x[1], g * x[2]]
}
