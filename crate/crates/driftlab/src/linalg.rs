//! Matrix-free iterative solvers for the grid operators.
//!
//! Conjugate gradients for the symmetric positive definite problems
//! (`-Lap + lambda`, `I + tau*(-Lap)`) and BiCGStab for the nonsymmetric
//! upwind resolvent. Both are hand-rolled on purpose: the operators are
//! matrix-free stencils and the solves sit inside certificate loops whose
//! behavior must stay fully deterministic.

use crate::error::{Error, Result};
use crate::grid::kahan_sum;

/// Matrix-free linear operator on flat grid storage.
pub trait LinOp: Sync {
    fn size(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    kahan_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Conjugate gradients: solve `A x = rhs` to `||r|| <= tol * ||rhs||`.
///
/// `x` carries the initial guess (warm start) and the solution on return.
pub fn conjugate_gradient(
    op: &dyn LinOp,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = op.size();
    assert_eq!(rhs.len(), n);
    assert_eq!(x.len(), n);

    let rhs_norm2 = dot(rhs, rhs);
    if rhs_norm2 == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let target2 = tol * tol * rhs_norm2;

    let mut ax = vec![0.0; n];
    op.apply(x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    if rs <= target2 {
        return Ok(SolveStats {
            iterations: 0,
            residual: (rs / rhs_norm2).sqrt(),
        });
    }
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let denom = dot(&p, &ap);
        if denom <= 0.0 {
            return Err(Error::Solver {
                iterations: it,
                residual: (rs / rhs_norm2).sqrt(),
                history: vec![],
            });
        }
        let alpha = rs / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        if rs_new <= target2 {
            return Ok(SolveStats {
                iterations: it,
                residual: (rs_new / rhs_norm2).sqrt(),
            });
        }
        let beta = rs_new / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_new;
    }
    Err(Error::Solver {
        iterations: max_iter,
        residual: (rs / rhs_norm2).sqrt(),
        history: vec![],
    })
}

/// BiCGStab for nonsymmetric systems, same convention as
/// [`conjugate_gradient`].  Keeps a sparse residual history for diagnostics
/// (every 10th iteration plus the final value).
pub fn bicgstab(
    op: &dyn LinOp,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = op.size();
    assert_eq!(rhs.len(), n);
    assert_eq!(x.len(), n);

    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = tol * rhs_norm;

    let mut tmp = vec![0.0; n];
    op.apply(x, &mut tmp);
    let mut r: Vec<f64> = rhs.iter().zip(&tmp).map(|(b, a)| b - a).collect();
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut history = Vec::new();
    let mut res = dot(&r, &r).sqrt();
    if res <= target {
        return Ok(SolveStats {
            iterations: 0,
            residual: res / rhs_norm,
        });
    }
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            history.push(res / rhs_norm);
            return Err(Error::Solver {
                iterations: it,
                residual: res / rhs_norm,
                history,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        op.apply(&p, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let s_norm = dot(&s, &s).sqrt();
        if s_norm <= target {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok(SolveStats {
                iterations: it,
                residual: s_norm / rhs_norm,
            });
        }
        op.apply(&s, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            history.push(s_norm / rhs_norm);
            return Err(Error::Solver {
                iterations: it,
                residual: s_norm / rhs_norm,
                history,
            });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        res = dot(&r, &r).sqrt();
        if it % 10 == 0 {
            history.push(res / rhs_norm);
        }
        if res <= target {
            return Ok(SolveStats {
                iterations: it,
                residual: res / rhs_norm,
            });
        }
        if omega.abs() < 1e-300 {
            history.push(res / rhs_norm);
            return Err(Error::Solver {
                iterations: it,
                residual: res / rhs_norm,
                history,
            });
        }
    }
    history.push(res / rhs_norm);
    Err(Error::Solver {
        iterations: max_iter,
        residual: res / rhs_norm,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);
    impl LinOp for Diag {
        fn size(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
    }

    struct Shift(Vec<f64>);
    // nonsymmetric: diagonal plus a sub-diagonal coupling
    impl LinOp for Shift {
        fn size(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i] - if i > 0 { 0.3 * x[i - 1] } else { 0.0 };
            }
        }
    }

    #[test]
    fn cg_solves_diagonal_system() {
        let op = Diag((1..=50).map(|i| i as f64).collect());
        let rhs: Vec<f64> = (1..=50).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 50];
        conjugate_gradient(&op, &rhs, &mut x, 1e-12, 500).unwrap();
        for i in 0..50 {
            assert!((x[i] - rhs[i] / (i as f64 + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let op = Shift((1..=40).map(|i| 2.0 + i as f64).collect());
        let rhs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos()).collect();
        let mut x = vec![0.0; 40];
        bicgstab(&op, &rhs, &mut x, 1e-12, 500).unwrap();
        let mut ax = vec![0.0; 40];
        op.apply(&x, &mut ax);
        let res: f64 = ax
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-10, "residual {res}");
    }
}
