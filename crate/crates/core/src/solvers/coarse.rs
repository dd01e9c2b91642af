use super::{pcg, CgConfig, JacobiPreconditioner};
use crate::error::Result;
use crate::linalg::{DenseCholesky, LinearOperator};
use crate::mfoperator::{assemble_oracle, MatrixFreeOperator};

/// Largest coarse system factored densely.
pub const DIRECT_MAX_DOFS: usize = 2000;

/// Exact solver for the bottom level: a cached dense Cholesky factor for
/// small systems, otherwise Jacobi-preconditioned CG to a `1e-8` reduction.
#[derive(Debug, Clone)]
pub enum CoarseSolver {
    Direct(DenseCholesky),
    Iterative { diag: Vec<f64>, reduction: f64 },
}

impl CoarseSolver {
    pub fn new(op: &MatrixFreeOperator) -> Result<Self> {
        Self::with_direct_limit(op, DIRECT_MAX_DOFS)
    }

    /// Factors densely when the system has at most `limit` DoFs.
    pub fn with_direct_limit(op: &MatrixFreeOperator, limit: usize) -> Result<Self> {
        if op.n_dofs() <= limit {
            let m = assemble_oracle(op)?;
            Ok(Self::Direct(DenseCholesky::factor(m.n_rows(), m.to_dense())?))
        } else {
            Ok(Self::Iterative { diag: op.compute_diagonal(), reduction: 1e-8 })
        }
    }

    pub fn is_direct(&self) -> bool {
        matches!(self, Self::Direct(_))
    }

    pub fn solve(&self, op: &dyn LinearOperator, b: &[f64], x: &mut [f64]) -> Result<()> {
        match self {
            Self::Direct(chol) => {
                chol.solve(b, x);
                Ok(())
            }
            Self::Iterative { diag, reduction } => {
                x.fill(0.0);
                let cfg = CgConfig { reduction: *reduction, max_iterations: 10 * b.len() };
                pcg(op, &JacobiPreconditioner::new(diag), b, x, &cfg)?;
                Ok(())
            }
        }
    }
}
