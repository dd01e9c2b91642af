use std::sync::Arc;

use super::{Level, MultigridHierarchy};
use crate::error::{Error, Result};
use crate::fespace::{dirichlet_constraints, Constraints, FESpace};
use crate::geosearch::SearchConfig;
use crate::mesh::Mesh;
use crate::mfoperator::{MatrixFreeOperator, Physics};
use crate::solvers::{ChebyshevConfig, DIRECT_MAX_DOFS};
use crate::transfer::{EmbeddingTransfer, NonNestedTransfer, Transfer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseningMode {
    /// One level per mesh, all of degree `p`.
    HOnly,
    /// Below the coarsest mesh, degrees `p - 1, …, 1` on that same mesh.
    Hp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// Point evaluation at fine support points; works for any mesh pair.
    NonNested,
    /// Cell-wise embedding; fails unless each fine cell lies in a coarse one.
    Nested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyConfig {
    pub degree: usize,
    pub mode: CoarseningMode,
    pub transfer: TransferKind,
    pub physics: Physics,
    /// Boundary ids with homogeneous Dirichlet conditions; `None` means all.
    pub dirichlet_ids: Option<Vec<u32>>,
    pub smoother: ChebyshevConfig,
    /// Chebyshev applications before and after the coarse correction.
    pub pre_steps: usize,
    pub post_steps: usize,
    pub search: SearchConfig,
    /// Largest bottom level solved by a dense factorization; larger ones use CG.
    pub coarse_direct_limit: usize,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            degree: 1,
            mode: CoarseningMode::HOnly,
            transfer: TransferKind::NonNested,
            physics: Physics::Laplace,
            dirichlet_ids: None,
            smoother: ChebyshevConfig::default(),
            pre_steps: 2,
            post_steps: 2,
            search: SearchConfig::default(),
            coarse_direct_limit: DIRECT_MAX_DOFS,
        }
    }
}

impl HierarchyConfig {
    pub fn n_components(&self, dim: usize) -> usize {
        match self.physics {
            Physics::Laplace => 1,
            Physics::Elasticity { .. } => dim,
        }
    }
}

struct Stage {
    space: Arc<FESpace>,
    constraints: Constraints,
    label: String,
}

fn stage(mesh: &Arc<Mesh>, degree: usize, nc: usize, cfg: &HierarchyConfig, label: String) -> Result<Stage> {
    let space = Arc::new(FESpace::new(mesh.clone(), degree, nc));
    let ids = cfg.dirichlet_ids.clone().unwrap_or_else(|| mesh.boundary_ids());
    let constraints = dirichlet_constraints(&space, &ids, |_, _| 0.0)?;
    Ok(Stage { space, constraints, label })
}

/// Builds the level stack for meshes ordered from coarse to fine.
///
/// With `CoarseningMode::Hp` and `degree = 3` the levels are
/// `Q1(T1), Q2(T1), Q3(T1), Q3(T2), …`.
pub fn build_hp_hierarchy(meshes: &[Arc<Mesh>], cfg: &HierarchyConfig) -> Result<MultigridHierarchy> {
    let first = meshes.first().ok_or_else(|| Error::IncompatibleSpaces("no meshes given".into()))?;
    let dim = first.dim();
    if let Some(m) = meshes.iter().find(|m| m.dim() != dim) {
        return Err(Error::IncompatibleSpaces(format!("mixed dimensions {dim} and {}", m.dim())));
    }
    if cfg.degree == 0 {
        return Err(Error::DegreeTooLow(0));
    }
    let nc = cfg.n_components(dim);
    let mut stages = Vec::new();
    let mut polynomial = Vec::new();
    if cfg.mode == CoarseningMode::Hp {
        for q in 1..cfg.degree {
            stages.push(stage(first, q, nc, cfg, format!("Q{q}(T1)"))?);
            polynomial.push(true);
        }
    }
    for (i, mesh) in meshes.iter().enumerate() {
        stages.push(stage(mesh, cfg.degree, nc, cfg, format!("Q{}(T{})", cfg.degree, i + 1))?);
        polynomial.push(false);
    }
    let mut transfers: Vec<Box<dyn Transfer>> = Vec::with_capacity(stages.len() - 1);
    for i in 1..stages.len() {
        let (c, f) = (&stages[i - 1], &stages[i]);
        let t: Box<dyn Transfer> = if polynomial[i - 1] && Arc::ptr_eq(c.space.mesh(), f.space.mesh()) {
            Box::new(EmbeddingTransfer::setup_polynomial(c.space.clone(), &c.constraints, f.space.clone(), &f.constraints)?)
        } else {
            match cfg.transfer {
                TransferKind::NonNested => Box::new(NonNestedTransfer::setup(
                    c.space.clone(),
                    &c.constraints,
                    f.space.clone(),
                    &f.constraints,
                    &cfg.search,
                )?),
                TransferKind::Nested => {
                    Box::new(EmbeddingTransfer::setup_nested(c.space.clone(), &c.constraints, f.space.clone(), &f.constraints)?)
                }
            }
        };
        transfers.push(t);
    }
    let mut levels = Vec::with_capacity(stages.len());
    for s in stages {
        let op = MatrixFreeOperator::new(s.space, s.constraints, cfg.physics)?;
        levels.push(Level::new(op, &cfg.smoother, s.label));
    }
    MultigridHierarchy::with_direct_limit(levels, transfers, cfg.pre_steps, cfg.post_steps, cfg.coarse_direct_limit)
}
