//! Chebyshev–Jacobi smoothing with Lanczos eigenvalue estimates, the
//! preconditioned conjugate-gradient method and coarse-grid solvers.

mod cg;
mod chebyshev;
mod coarse;
mod lanczos;

pub use cg::{pcg, CgConfig, SolveResult};
pub use chebyshev::{ChebyshevConfig, ChebyshevJacobi};
pub use coarse::{CoarseSolver, DIRECT_MAX_DOFS};
pub use lanczos::{estimate_eigenvalues, EigenEstimate, LANCZOS_SEED};

use crate::error::Result;

/// `z = M⁻¹ r` for a symmetric positive definite `M`.
pub trait Preconditioner {
    fn precondition(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn precondition(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

/// Point Jacobi: `z = D⁻¹ r`.
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(diag: &[f64]) -> Self {
        Self { inv_diag: diag.iter().map(|d| 1.0 / d).collect() }
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn precondition(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *z = r * d;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
