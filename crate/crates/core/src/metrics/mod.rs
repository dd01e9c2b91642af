//! Simulated partitioning of each level and the multigrid partition
//! statistics: serial and parallel workload, workload efficiency and
//! vertical communication efficiency between consecutive levels.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fespace::FESpace;
use crate::geosearch::{locate_in_mesh, SearchConfig};
use crate::mesh::{Mesh, PartitionLabels};
use crate::transfer::TransferPoint;

#[derive(Debug, Clone, Copy)]
pub enum PartitionPolicy<'a> {
    /// Cells sorted along a Morton curve through their centroids, then split
    /// into contiguous chunks of equal size.
    Default,
    /// Each cell takes the rank of the fine cell containing its centroid.
    Matching { fine: &'a Mesh, fine_labels: &'a PartitionLabels },
}

/// Interleaves the bits of the quantized coordinates, first axis lowest.
pub fn morton_key(q: [u32; 3], dim: usize) -> u64 {
    let bits = 64 / dim as u32;
    let mut key = 0u64;
    for b in 0..bits.min(32) {
        for (k, &qk) in q.iter().enumerate().take(dim) {
            key |= (((qk >> b) & 1) as u64) << (b as usize * dim + k);
        }
    }
    key
}

/// Cell indices in Morton order of their centroids; ties keep index order.
pub fn morton_order(mesh: &Mesh) -> Vec<usize> {
    let dim = mesh.dim();
    let (lo, hi) = mesh.bounding_box();
    let bits = 64 / dim as u32;
    let scale = ((1u64 << bits.min(32)) - 1) as f64;
    let mut keyed: Vec<(u64, usize)> = (0..mesh.n_cells())
        .map(|c| {
            let x = mesh.cell_centroid(c);
            let mut q = [0u32; 3];
            for k in 0..dim {
                let ext = (hi[k] - lo[k]).max(f64::MIN_POSITIVE);
                q[k] = (((x[k] - lo[k]) / ext).clamp(0.0, 1.0) * scale) as u32;
            }
            (morton_key(q, dim), c)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, c)| c).collect()
}

pub fn partition(mesh: &Mesh, n_ranks: usize, policy: PartitionPolicy) -> Result<PartitionLabels> {
    if n_ranks == 0 {
        return Err(Error::Config("partition needs at least one rank".into()));
    }
    let n = mesh.n_cells();
    if n_ranks > n {
        return Err(Error::TooManyRanks { ranks: n_ranks, cells: n });
    }
    match policy {
        PartitionPolicy::Default => {
            let mut owner = vec![0; n];
            for (pos, c) in morton_order(mesh).into_iter().enumerate() {
                owner[c] = pos * n_ranks / n;
            }
            PartitionLabels::new(owner, n_ranks)
        }
        PartitionPolicy::Matching { fine, fine_labels } => {
            if fine_labels.n_cells() != fine.n_cells() {
                return Err(Error::SizeMismatch { expected: fine.n_cells(), got: fine_labels.n_cells() });
            }
            let centroids: Vec<_> = (0..n).map(|c| mesh.cell_centroid(c)).collect();
            let found = locate_in_mesh(fine, &centroids, &SearchConfig::default())?;
            let owner = found.iter().map(|o| fine_labels.rank_of(o.cell)).collect();
            PartitionLabels::new(owner, fine_labels.n_ranks().max(n_ranks))
        }
    }
}

/// Owner rank of every node of `space`: the lowest rank among the cells
/// sharing it.
pub fn node_owners(space: &FESpace, labels: &PartitionLabels) -> Vec<usize> {
    let mut owner = vec![usize::MAX; space.n_nodes()];
    for cell in 0..space.n_cells() {
        let r = labels.rank_of(cell);
        for &node in space.cell_nodes(cell) {
            owner[node] = owner[node].min(r);
        }
    }
    owner
}

/// Number of transfer points whose fine owner equals the owner of the coarse
/// cell they were located in, and the total number of points.
pub fn owned_points(
    coarse_labels: &PartitionLabels,
    fine_space: &FESpace,
    fine_labels: &PartitionLabels,
    points: &[TransferPoint],
) -> (usize, usize) {
    let owners = node_owners(fine_space, fine_labels);
    let same = points.iter().filter(|p| owners[p.fine_node] == coarse_labels.rank_of(p.coarse_cell)).count();
    (same, points.len())
}

/// Share of fine transfer points owned by the same rank on both levels;
/// `1.0` when there are no points.
pub fn vertical_efficiency(
    coarse_labels: &PartitionLabels,
    fine_space: &FESpace,
    fine_labels: &PartitionLabels,
    points: &[TransferPoint],
) -> f64 {
    let (same, total) = owned_points(coarse_labels, fine_space, fine_labels, points);
    if total == 0 {
        1.0
    } else {
        same as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionStats {
    pub n_ranks: usize,
    /// `C_l`, coarsest level first.
    pub cells: Vec<usize>,
    /// `C_l^p` per level and rank.
    pub cells_per_rank: Vec<Vec<usize>>,
    /// `W_s = Σ_l C_l`.
    pub serial_workload: usize,
    /// `W_p = Σ_l max_p C_l^p`.
    pub parallel_workload: usize,
    /// `W_s / (W_p · p)`.
    pub efficiency: f64,
    /// One entry per consecutive level pair, coarsest pair first.
    pub vertical: Vec<f64>,
}

impl PartitionStats {
    pub fn mean_vertical(&self) -> Option<f64> {
        if self.vertical.is_empty() {
            None
        } else {
            Some(self.vertical.iter().sum::<f64>() / self.vertical.len() as f64)
        }
    }
}

/// Workload statistics of a hierarchy from the labels of each level;
/// `vertical` holds the efficiencies of the level pairs, if known.
pub fn workload_stats(labels: &[PartitionLabels], vertical: Vec<f64>) -> Result<PartitionStats> {
    let n_ranks = labels.iter().map(|l| l.n_ranks()).max().unwrap_or(1);
    if !vertical.is_empty() && vertical.len() + 1 != labels.len() {
        return Err(Error::SizeMismatch { expected: labels.len().saturating_sub(1), got: vertical.len() });
    }
    let cells: Vec<usize> = labels.iter().map(|l| l.n_cells()).collect();
    let cells_per_rank: Vec<Vec<usize>> = labels
        .iter()
        .map(|l| {
            let mut c = l.counts();
            c.resize(n_ranks, 0);
            c
        })
        .collect();
    let serial_workload = cells.iter().sum();
    let parallel_workload = cells_per_rank.iter().map(|c| c.iter().copied().max().unwrap_or(0)).sum();
    let efficiency = if parallel_workload == 0 {
        1.0
    } else {
        serial_workload as f64 / (parallel_workload as f64 * n_ranks as f64)
    };
    Ok(PartitionStats { n_ranks, cells, cells_per_rank, serial_workload, parallel_workload, efficiency, vertical })
}

/// One table row per hierarchy: `levels,wl,wl-eff,v-eff`.
pub fn write_stats_csv(rows: &[(usize, PartitionStats)], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "level,wl,wl-eff,v-eff")?;
    for (l, s) in rows {
        let v = s.mean_vertical().map_or_else(String::new, |v| format!("{v:.6}"));
        writeln!(out, "{l},{},{:.6},{v}", s.parallel_workload, s.efficiency)?;
    }
    Ok(())
}
