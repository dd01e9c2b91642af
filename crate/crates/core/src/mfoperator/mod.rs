//! Matrix-free Poisson and linear elasticity operators evaluated with sum
//! factorization on Gauss–Legendre points.
//!
//! Constrained DoFs follow the homogeneous-operator convention: constrained
//! input entries are treated as zero and constrained output entries copy the
//! input, so the operator is the identity on the constrained subspace.

mod assembly;
mod kernel;

use std::sync::Arc;

use rayon::prelude::*;

pub use assembly::{assemble_oracle, assemble_rhs, Load};

use crate::error::{Error, Result};
use crate::fespace::{gauss_legendre, Constraints, FESpace};
use crate::linalg::LinearOperator;
use crate::mesh::mapping::inv3;
use kernel::{CellKernel, Scratch};

/// Assembly limit of the explicit oracle matrix.
pub const ORACLE_MAX_DOFS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physics {
    /// `-Δu`, any number of components.
    Laplace,
    /// `-div σ(u)` with `σ = λ tr(ε) I + 2 μ ε`; needs `dim` components.
    Elasticity { lambda: f64, mu: f64 },
}

/// Lamé parameters `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_parameters(young: f64, poisson: f64) -> (f64, f64) {
    let lambda = young * poisson / ((1.0 - 2.0 * poisson) * (1.0 + poisson));
    let mu = young / (2.0 * (1.0 + poisson));
    (lambda, mu)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QData {
    pub jinv: [[f64; 3]; 3],
    pub jxw: f64,
}

#[derive(Debug, Clone, Copy)]
enum CellGeometry {
    // constant Jacobian: inverse and determinant, weights applied on the fly
    Affine { jinv: [[f64; 3]; 3], det: f64 },
    // offset into the per-point table
    General { offset: usize },
}

#[derive(Debug, Clone)]
pub struct MatrixFreeOperator {
    space: Arc<FESpace>,
    constraints: Constraints,
    physics: Physics,
    kernel: CellKernel,
    cells: Vec<CellGeometry>,
    qdata: Vec<QData>,
}

impl MatrixFreeOperator {
    pub fn new(space: Arc<FESpace>, constraints: Constraints, physics: Physics) -> Result<Self> {
        if constraints.n_dofs() != space.n_dofs() {
            return Err(Error::SizeMismatch { expected: space.n_dofs(), got: constraints.n_dofs() });
        }
        if let Physics::Elasticity { .. } = physics {
            if space.n_components() != space.dim() {
                return Err(Error::IncompatibleSpaces(format!(
                    "elasticity needs {} components, space has {}",
                    space.dim(),
                    space.n_components()
                )));
            }
        }
        let dim = space.dim();
        let nq = space.degree() + 1;
        let (qp, qw) = gauss_legendre(nq);
        let kernel = CellKernel::new(space.shape(), dim, space.n_components(), &qp, &qw, physics);
        let mesh = space.mesh().clone();
        let mut cells = Vec::with_capacity(mesh.n_cells());
        let mut qdata = Vec::new();
        let nqt = nq.pow(dim as u32);
        for cell in 0..mesh.n_cells() {
            let map = mesh.mapping(cell);
            if map.is_affine() {
                let j = map.jacobian(&[0.5, 0.5, 0.5]);
                let jinv = inv3(&j).ok_or(Error::NonPositiveJacobian { cell, det: 0.0 })?;
                cells.push(CellGeometry::Affine { jinv, det: map.jacobian_det(&[0.5, 0.5, 0.5]) });
            } else {
                cells.push(CellGeometry::General { offset: qdata.len() });
                for q in 0..nqt {
                    let xh = crate::fespace::local_node_ref(&qp, dim, q);
                    let j = map.jacobian(&xh);
                    let det = crate::mesh::mapping::det3(&j);
                    let jinv = inv3(&j).ok_or(Error::NonPositiveJacobian { cell, det })?;
                    qdata.push(QData { jinv, jxw: det * kernel.weight(q) });
                }
            }
        }
        Ok(Self { space, constraints, physics, kernel, cells, qdata })
    }

    pub fn laplace(space: Arc<FESpace>, constraints: Constraints) -> Result<Self> {
        Self::new(space, constraints, Physics::Laplace)
    }

    pub fn elasticity(space: Arc<FESpace>, constraints: Constraints, lambda: f64, mu: f64) -> Result<Self> {
        Self::new(space, constraints, Physics::Elasticity { lambda, mu })
    }

    pub fn space(&self) -> &Arc<FESpace> {
        &self.space
    }

    pub fn constraints(&self) -> &Constraints {
        &self.constraints
    }

    pub fn physics(&self) -> Physics {
        self.physics
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    fn cell_qdata(&self, cell: usize, buf: &mut Vec<QData>) {
        buf.clear();
        match self.cells[cell] {
            CellGeometry::Affine { jinv, det } => {
                buf.extend((0..self.kernel.n_q()).map(|q| QData { jinv, jxw: det * self.kernel.weight(q) }))
            }
            CellGeometry::General { offset } => buf.extend_from_slice(&self.qdata[offset..offset + self.kernel.n_q()]),
        }
    }

    /// Runs `f(cell, scratch, local_out)` for every cell in parallel and then
    /// accumulates the local outputs into `y` in cell order.
    fn cell_loop<F>(&self, y: &mut [f64], f: F)
    where
        F: Fn(usize, &mut Scratch, &mut Vec<QData>, &mut [f64]) + Sync,
    {
        let dpc = self.space.dofs_per_cell();
        let mut local = vec![0.0; self.space.n_cells() * dpc];
        local.par_chunks_mut(dpc).enumerate().for_each_init(
            || (self.kernel.scratch(), Vec::new()),
            |(scratch, qd), (cell, out)| f(cell, scratch, qd, out),
        );
        y.fill(0.0);
        let nc = self.space.n_components();
        let npc = self.space.nodes_per_cell();
        for (cell, out) in local.chunks(dpc).enumerate() {
            for (c, block) in out.chunks(npc).enumerate() {
                for (&node, v) in self.space.cell_nodes(cell).iter().zip(block) {
                    y[node * nc + c] += v;
                }
            }
        }
    }

    fn gather(&self, cell: usize, x: &[f64], out: &mut [f64]) {
        let nc = self.space.n_components();
        let npc = self.space.nodes_per_cell();
        for c in 0..nc {
            for (i, &node) in self.space.cell_nodes(cell).iter().enumerate() {
                out[c * npc + i] = x[node * nc + c];
            }
        }
    }

    /// `y = A x` without any constraint handling.
    pub fn apply_unconstrained(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_dofs(), "input length");
        assert_eq!(y.len(), self.n_dofs(), "output length");
        self.cell_loop(y, |cell, scratch, qd, out| {
            self.cell_qdata(cell, qd);
            self.gather(cell, x, &mut scratch.input);
            self.kernel.apply(scratch, qd, out);
        });
    }

    /// Checked variant of [`LinearOperator::apply`].
    pub fn try_apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        for len in [x.len(), y.len()] {
            if len != self.n_dofs() {
                return Err(Error::SizeMismatch { expected: self.n_dofs(), got: len });
            }
        }
        self.apply(x, y);
        Ok(())
    }

    /// Exact diagonal of the constrained operator by local column probing;
    /// constrained entries are one.
    pub fn compute_diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.n_dofs()];
        let dpc = self.space.dofs_per_cell();
        self.cell_loop(&mut diag, |cell, scratch, qd, out| {
            self.cell_qdata(cell, qd);
            let mut col = vec![0.0; dpc];
            for j in 0..dpc {
                scratch.input.fill(0.0);
                scratch.input[j] = 1.0;
                self.kernel.apply(scratch, qd, &mut col);
                out[j] = col[j];
            }
        });
        for (d, _) in self.constraints.iter() {
            diag[d] = 1.0;
        }
        diag
    }
}

impl LinearOperator for MatrixFreeOperator {
    fn n(&self) -> usize {
        self.n_dofs()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if self.constraints.is_empty() {
            return self.apply_unconstrained(x, y);
        }
        let mut xin = x.to_vec();
        self.constraints.set_zero(&mut xin);
        self.apply_unconstrained(&xin, y);
        for (d, _) in self.constraints.iter() {
            y[d] = x[d];
        }
    }
}

#[cfg(test)]
mod tests;
