//! In-process simulation of the two-phase distributed search: requesters
//! send each point to every rank whose padded domain box contains it, ranks
//! answer from their local cells, requesters pick the winning answer.

use super::{best_candidate, ownership, AabbTree, Candidate, PointOwnership, SearchConfig};
use crate::error::Result;
use crate::mesh::{Mesh, PartitionLabels, Point};

/// Communication volume between simulated ranks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExchangeStats {
    n_ranks: usize,
    // row-major requester × owner point counts
    counts: Vec<usize>,
}

impl ExchangeStats {
    pub fn new(n_ranks: usize) -> Self {
        Self { n_ranks, counts: vec![0; n_ranks * n_ranks] }
    }

    pub(crate) fn record(&mut self, from: usize, to: usize) {
        self.counts[from * self.n_ranks + to] += 1;
    }

    pub fn n_ranks(&self) -> usize {
        self.n_ranks
    }

    pub fn count(&self, from: usize, to: usize) -> usize {
        self.counts[from * self.n_ranks + to]
    }

    pub fn total_points(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Points whose requester differs from the target rank.
    pub fn remote_points(&self) -> usize {
        (0..self.n_ranks).flat_map(|a| (0..self.n_ranks).map(move |b| (a, b))).filter(|(a, b)| a != b).map(|(a, b)| self.count(a, b)).sum()
    }

    /// Distinct requester → target pairs with traffic, excluding self-sends.
    pub fn messages(&self) -> usize {
        (0..self.n_ranks).flat_map(|a| (0..self.n_ranks).map(move |b| (a, b))).filter(|&(a, b)| a != b && self.count(a, b) > 0).count()
    }
}

/// Distributed search result plus the request and answer traffic.
#[derive(Debug, Clone)]
pub struct DistributedSearch {
    pub ownerships: Vec<PointOwnership>,
    /// Points sent requester → rank in the request round.
    pub requests: ExchangeStats,
    /// Resolved point ownership, requester → owning rank.
    pub owners: ExchangeStats,
}

pub fn distributed_locate(
    mesh: &Mesh,
    partition: &PartitionLabels,
    points: &[Point],
    requester_ranks: &[usize],
    cfg: &SearchConfig,
) -> Result<DistributedSearch> {
    let n_ranks = partition.n_ranks();
    let pad = cfg.padding_for(mesh);
    let mut local_cells = vec![Vec::new(); n_ranks];
    for cell in 0..mesh.n_cells() {
        local_cells[partition.rank_of(cell)].push(cell);
    }
    let trees: Vec<Option<AabbTree>> =
        local_cells.iter().map(|cells| (!cells.is_empty()).then(|| AabbTree::build(mesh, cells, pad))).collect();

    // request round
    let mut requests = ExchangeStats::new(n_ranks);
    let mut inbox: Vec<Vec<usize>> = vec![Vec::new(); n_ranks];
    for (i, x) in points.iter().enumerate() {
        for (r, tree) in trees.iter().enumerate() {
            if tree.as_ref().is_some_and(|t| t.root_box().contains(x)) {
                requests.record(requester_ranks[i], r);
                inbox[r].push(i);
            }
        }
    }

    // answer round: each rank reports its best local candidate
    let mut answers: Vec<Option<Candidate>> = vec![None; points.len()];
    for (r, received) in inbox.iter().enumerate() {
        let tree = trees[r].as_ref().expect("only ranks with cells receive points");
        for &i in received {
            let local = best_candidate(mesh, &points[i], &tree.query(&points[i]), cfg);
            if let Some(c) = local {
                answers[i] = Some(c.better(answers[i]));
            }
        }
    }

    let mut owners = ExchangeStats::new(n_ranks);
    let mut ownerships = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        let mut o = ownership(i, x, answers[i])?;
        o.owner_rank = partition.rank_of(o.cell);
        owners.record(requester_ranks[i], o.owner_rank);
        ownerships.push(o);
    }
    Ok(DistributedSearch { ownerships, requests, owners })
}
