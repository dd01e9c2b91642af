//! Point location in quad/hex meshes: AABB-tree candidates, mapping
//! inversion, deterministic tie-breaking and projection onto the reference
//! cell for points just outside the mesh.

mod distributed;
mod tree;

use std::cmp::Ordering;

use rayon::prelude::*;

pub use distributed::{distributed_locate, DistributedSearch, ExchangeStats};
pub use tree::{build_tree, Aabb, AabbTree};

use crate::error::{Error, Result};
use crate::mesh::{dist, Mesh, PartitionLabels, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Box padding relative to the domain diameter.
    pub box_padding: f64,
    /// Slack when testing `x̂ ∈ [0,1]^d`.
    pub eps_ref: f64,
    /// Newton tolerance relative to the cell diameter.
    pub newton_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { box_padding: 1e-6, eps_ref: 1e-10, newton_tol: 1e-12 }
    }
}

impl SearchConfig {
    pub fn padding_for(&self, mesh: &Mesh) -> f64 {
        self.box_padding * mesh.diameter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOwnership {
    pub point: usize,
    pub cell: usize,
    pub reference: Point,
    pub owner_rank: usize,
    pub projected: bool,
}

/// Euclidean projection onto `[0,1]^dim`.
pub fn project_to_reference(xh: &Point, dim: usize) -> Point {
    let mut out = *xh;
    for v in out.iter_mut().take(dim) {
        *v = v.clamp(0.0, 1.0);
    }
    out
}

pub(crate) fn inside_reference(xh: &Point, dim: usize, eps: f64) -> bool {
    xh.iter().take(dim).all(|&v| v >= -eps && v <= 1.0 + eps)
}

/// Outcome of testing one point against a set of candidate cells.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Candidate {
    Inside { cell: usize, reference: Point },
    Outside { cell: usize, reference: Point, distance: f64 },
}

impl Candidate {
    /// Inside beats outside; then lower cell index, or smaller distance.
    pub(crate) fn better(self, other: Option<Candidate>) -> Candidate {
        let Some(o) = other else { return self };
        match (self, o) {
            (Candidate::Inside { cell: a, .. }, Candidate::Inside { cell: b, .. }) => {
                if a < b {
                    self
                } else {
                    o
                }
            }
            (Candidate::Inside { .. }, Candidate::Outside { .. }) => self,
            (Candidate::Outside { .. }, Candidate::Inside { .. }) => o,
            (Candidate::Outside { cell: a, distance: da, .. }, Candidate::Outside { cell: b, distance: db, .. }) => {
                match da.total_cmp(&db).then(a.cmp(&b)) {
                    Ordering::Greater => o,
                    _ => self,
                }
            }
        }
    }
}

/// Tests `x` against `candidates` (ascending); stops at the first cell that
/// contains it.
pub(crate) fn best_candidate(mesh: &Mesh, x: &Point, candidates: &[usize], cfg: &SearchConfig) -> Option<Candidate> {
    let dim = mesh.dim();
    let mut best: Option<Candidate> = None;
    for &cell in candidates {
        let map = mesh.mapping(cell);
        let Ok(xh) = map.invert_mapping(x, cfg.newton_tol * map.diameter()) else {
            continue;
        };
        if inside_reference(&xh, dim, cfg.eps_ref) {
            return Some(Candidate::Inside { cell, reference: xh }.better(best));
        }
        let proj = project_to_reference(&xh, dim);
        let distance = dist(&map.map_to_real(&proj), x);
        best = Some(Candidate::Outside { cell, reference: proj, distance }.better(best));
    }
    best
}

pub(crate) fn ownership(index: usize, x: &Point, best: Option<Candidate>) -> Result<PointOwnership> {
    match best {
        Some(Candidate::Inside { cell, reference }) => {
            Ok(PointOwnership { point: index, cell, reference, owner_rank: 0, projected: false })
        }
        Some(Candidate::Outside { cell, reference, .. }) => {
            Ok(PointOwnership { point: index, cell, reference, owner_rank: 0, projected: true })
        }
        None => Err(Error::OutsidePaddedDomain { index, point: *x }),
    }
}

/// Locates every point; the lowest containing cell wins, otherwise the
/// nearest projected candidate. Owner ranks are left at zero.
pub fn locate_points(tree: &AabbTree, mesh: &Mesh, points: &[Point], cfg: &SearchConfig) -> Result<Vec<PointOwnership>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| ownership(i, x, best_candidate(mesh, x, &tree.query(x), cfg)))
        .collect()
}

/// Convenience wrapper building the tree with the configured padding.
pub fn locate_in_mesh(mesh: &Mesh, points: &[Point], cfg: &SearchConfig) -> Result<Vec<PointOwnership>> {
    let tree = build_tree(mesh, cfg.padding_for(mesh));
    locate_points(&tree, mesh, points, cfg)
}

/// Fills `owner_rank` from the partition of the searched mesh and counts the
/// points whose requesting rank differs from the owner.
pub fn resolve_owner_ranks(
    ownerships: &mut [PointOwnership],
    partition: &PartitionLabels,
    requester_ranks: &[usize],
) -> ExchangeStats {
    let mut stats = ExchangeStats::new(partition.n_ranks().max(requester_ranks.iter().max().map_or(0, |r| r + 1)));
    for o in ownerships.iter_mut() {
        o.owner_rank = partition.rank_of(o.cell);
        stats.record(requester_ranks[o.point], o.owner_rank);
    }
    stats
}
