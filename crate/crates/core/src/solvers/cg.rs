use super::Preconditioner;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Stop once `‖b - A x‖ ≤ reduction · ‖b - A x₀‖`.
    pub reduction: f64,
    pub max_iterations: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { reduction: 1e-4, max_iterations: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub iterations: usize,
    pub converged: bool,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// Unpreconditioned residual norm after every iteration, starting with the initial one.
    pub residuals: Vec<f64>,
}

/// Preconditioned conjugate gradients on `A x = b`, starting from the given `x`.
/// Residual norms are those of the unpreconditioned system. When the
/// iteration limit is reached the current iterate is kept and `converged`
/// is false.
pub fn pcg(
    op: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    cfg: &CgConfig,
) -> Result<SolveResult> {
    let n = b.len();
    if x.len() != n || op.n() != n {
        return Err(Error::SizeMismatch { expected: op.n(), got: b.len().max(x.len()) });
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = norm(&r);
    let target = cfg.reduction * r0;
    let mut residuals = vec![r0];
    if r0 == 0.0 {
        return Ok(SolveResult { iterations: 0, converged: true, initial_residual: 0.0, final_residual: 0.0, residuals });
    }
    let mut z = vec![0.0; n];
    precond.precondition(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=cfg.max_iterations {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Indefinite(pap));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        let rn = norm(&r);
        residuals.push(rn);
        if rn <= target {
            return Ok(SolveResult { iterations: it, converged: true, initial_residual: r0, final_residual: rn, residuals });
        }
        precond.precondition(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let final_residual = *residuals.last().unwrap();
    Ok(SolveResult { iterations: cfg.max_iterations, converged: false, initial_residual: r0, final_residual, residuals })
}
