//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use nnmg::cases::{lshape_family, nested_hypercube, DEFAULT_SEED};
use nnmg::fespace::dirichlet_constraints;
use nnmg::geosearch::SearchConfig;
use nnmg::mfoperator::MatrixFreeOperator;
use nnmg::multigrid::{build_hp_hierarchy, CoarseningMode, HierarchyConfig, MultigridHierarchy};
use nnmg::transfer::{EmbeddingTransfer, NonNestedTransfer};
use nnmg::{Constraints, FESpace, Mesh, Result};

fn constrained(mesh: &Arc<Mesh>, degree: usize) -> Result<(Arc<FESpace>, Constraints)> {
    let space = Arc::new(FESpace::new(mesh.clone(), degree, 1));
    let c = dirichlet_constraints(&space, &mesh.boundary_ids(), |_, _| 0.0)?;
    Ok((space, c))
}

/// Laplace operator of degree `degree` on the `refinements`-times refined
/// `[-1,1]^dim`.
pub fn laplace_operator(dim: usize, degree: usize, refinements: usize) -> Result<MatrixFreeOperator> {
    let mesh = nested_hypercube(dim, refinements + 1)?.pop().expect("non-empty");
    let (space, c) = constrained(&mesh, degree)?;
    MatrixFreeOperator::laplace(space, c)
}

/// The same nested mesh pair connected once by point evaluation and once by
/// cell-wise embedding.
pub fn transfer_pair(dim: usize, degree: usize, fine_refinements: usize) -> Result<(NonNestedTransfer, EmbeddingTransfer)> {
    let meshes = nested_hypercube(dim, fine_refinements + 1)?;
    let (cs, cc) = constrained(&meshes[fine_refinements - 1], degree)?;
    let (fs, fc) = constrained(&meshes[fine_refinements], degree)?;
    let nn = NonNestedTransfer::setup(cs.clone(), &cc, fs.clone(), &fc, &SearchConfig::default())?;
    let emb = EmbeddingTransfer::setup_nested(cs, &cc, fs, &fc)?;
    Ok((nn, emb))
}

/// Non-nested L-shape hierarchy with polynomial coarsening.
pub fn lshape_hierarchy(degree: usize, n_levels: usize) -> Result<MultigridHierarchy> {
    let meshes = lshape_family(2, n_levels, DEFAULT_SEED)?;
    build_hp_hierarchy(&meshes, &HierarchyConfig { degree, mode: CoarseningMode::Hp, ..Default::default() })
}
