//! Weight functions used by the energy certificates: the profile `eta`, the
//! radial cutoffs `zeta_r`, and the polynomial weight `rho`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Parameters shared by the weight family.
///
/// `theta` controls the cutoff taper (`a = 1 + 1/theta`); `r` is the inner
/// plateau radius of `zeta_r`; `kappa` and `center` parameterize `rho`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightFamily {
    pub theta: f64,
    pub r: f64,
    pub kappa: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Eta,
    Zeta,
    Rho,
}

impl WeightFamily {
    /// Strict construction for the certificate pipeline: theta in (0, 1/2).
    pub fn new(theta: f64, r: f64, kappa: f64, center: [f64; 3]) -> Result<Self> {
        if !(theta > 0.0 && theta < 0.5) {
            return Err(Error::parameter(format!(
                "theta must lie in (0, 1/2), got {theta}"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::parameter("weight radius must be positive"));
        }
        if !(kappa > 0.0) {
            return Err(Error::parameter("kappa must be positive"));
        }
        Ok(WeightFamily {
            theta,
            r,
            kappa,
            center,
        })
    }

    /// `a = 1 + 1/theta`; zeta_r vanishes outside B_{a r}.
    #[inline]
    pub fn a(&self) -> f64 {
        1.0 + 1.0 / self.theta
    }

    /// The taper profile
    /// `eta(t) = 1` for `t <= 1`, `(1 - theta (t-1))^{1/theta}` on
    /// `1 < t < 1 + 1/theta`, and `0` beyond.
    ///
    /// Accepts theta in (0, 1/2]: the boundary value 1/2 is admitted for
    /// direct evaluation even though the certificate pipeline stays strict.
    pub fn eta(&self, t: f64) -> Result<f64> {
        let th = self.theta;
        if !(th > 0.0 && th <= 0.5) {
            return Err(Error::parameter(format!(
                "eta needs theta in (0, 1/2], got {th}"
            )));
        }
        Ok(if t <= 1.0 {
            1.0
        } else if t < 1.0 + 1.0 / th {
            (1.0 - th * (t - 1.0)).powf(1.0 / th)
        } else {
            0.0
        })
    }

    /// `zeta_r(x) = eta(|x - center| / r)`.
    pub fn zeta(&self, x: [f64; 3]) -> Result<f64> {
        let r = dist(x, self.center);
        self.eta(r / self.r)
    }

    /// `rho(y) = (1 + kappa |y - center|^2)^{-d/2 - 1}` with d = 3.
    pub fn rho(&self, x: [f64; 3]) -> f64 {
        let r = dist(x, self.center);
        (1.0 + self.kappa * r * r).powf(-(3.0 / 2.0) - 1.0)
    }

    pub fn eval(&self, kind: WeightKind, x: [f64; 3]) -> Result<f64> {
        match kind {
            WeightKind::Eta => self.eta(x[0]),
            WeightKind::Zeta => self.zeta(x),
            WeightKind::Rho => Ok(self.rho(x)),
        }
    }
}

#[inline]
fn dist(x: [f64; 3], c: [f64; 3]) -> f64 {
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt()
}

/// Result of the finite-difference sweep over the cutoff bounds
/// `|grad zeta_r| <= 1/r` and `-Lap zeta_r <= (d-1)/r^2` on the annulus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightBoundReport {
    /// Worst `|grad zeta| - bound` over admissible sample points (<= 0 means the bound held).
    pub max_gradient_violation: f64,
    /// Worst `-Lap zeta - bound` over admissible sample points.
    pub max_laplacian_violation: f64,
    /// Number of sample points checked.
    pub samples: usize,
    /// Points skipped for sitting within 3h of a kink of eta.
    pub skipped_near_kinks: usize,
}

/// Centered-difference verification of the distributional bounds on
/// `zeta_r`, excluding a 3h neighborhood of the kinks at `|x| = r` and
/// `|x| = a r` where the profile is only Lipschitz.
pub fn weight_bound_check(w: &WeightFamily, grid: &Grid) -> Result<WeightBoundReport> {
    let h = grid.spacing();
    let a = w.a();
    if w.r - 3.0 * h <= 0.0 || (a * w.r - w.r) <= 6.0 * h {
        return Err(Error::config(format!(
            "grid spacing {h} does not resolve the annulus [{}, {}]",
            w.r,
            a * w.r
        )));
    }
    let d = 3.0_f64;
    let grad_bound = 1.0 / w.r;
    let lap_bound = (d - 1.0) / (w.r * w.r);

    let zeta_at = |x: [f64; 3]| w.zeta(x);

    let mut max_grad = f64::NEG_INFINITY;
    let mut max_lap = f64::NEG_INFINITY;
    let mut samples = 0usize;
    let mut skipped = 0usize;
    let n = grid.points;
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            for k in 1..n - 1 {
                let x = grid.point(i, j, k);
                let rad = dist(x, w.center);
                // skip the 3h kink collars
                if (rad - w.r).abs() < 3.0 * h || (rad - a * w.r).abs() < 3.0 * h {
                    skipped += 1;
                    continue;
                }
                samples += 1;
                let mut grad2 = 0.0;
                let mut lap = 0.0;
                let c = zeta_at(x)?;
                for axis in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[axis] += h;
                    xm[axis] -= h;
                    let fp = zeta_at(xp)?;
                    let fm = zeta_at(xm)?;
                    let g = (fp - fm) / (2.0 * h);
                    grad2 += g * g;
                    lap += (fp - 2.0 * c + fm) / (h * h);
                }
                let indicator = if rad >= w.r && rad <= a * w.r { 1.0 } else { 0.0 };
                max_grad = max_grad.max(grad2.sqrt() - grad_bound * indicator);
                max_lap = max_lap.max(-lap - lap_bound * indicator);
            }
        }
    }
    Ok(WeightBoundReport {
        max_gradient_violation: max_grad,
        max_laplacian_violation: max_lap,
        samples,
        skipped_near_kinks: skipped,
    })
}
