use std::time::Duration;

use crate::transfer::ProlongationTiming;

/// Component names in V-cycle order.
pub const COMPONENTS: [&str; 6] = ["PreSmoother", "Residual", "Restrictor", "CoarseGridSolver", "Prolongator", "PostSmoother"];

/// Exclusive times of one level. Restriction and prolongation are booked on
/// the finer of the two levels they connect.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LevelProfile {
    pub pre_smooth: Duration,
    pub residual: Duration,
    pub restrict: Duration,
    pub coarse_solve: Duration,
    pub prolongate: ProlongationTiming,
    pub post_smooth: Duration,
}

impl LevelProfile {
    /// Times in the order of [`COMPONENTS`].
    pub fn components(&self) -> [Duration; 6] {
        [
            self.pre_smooth,
            self.residual,
            self.restrict,
            self.coarse_solve,
            self.prolongate.evaluation + self.prolongate.gather_scatter,
            self.post_smooth,
        ]
    }

    pub fn sum(&self) -> Duration {
        self.components().iter().sum()
    }

    fn add(&mut self, o: &LevelProfile) {
        self.pre_smooth += o.pre_smooth;
        self.residual += o.residual;
        self.restrict += o.restrict;
        self.coarse_solve += o.coarse_solve;
        self.prolongate.evaluation += o.prolongate.evaluation;
        self.prolongate.gather_scatter += o.prolongate.gather_scatter;
        self.post_smooth += o.post_smooth;
    }
}

/// Accumulated timing over a number of V-cycles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VCycleProfile {
    pub levels: Vec<LevelProfile>,
    pub total: Duration,
    pub cycles: usize,
}

impl VCycleProfile {
    pub fn new(n_levels: usize) -> Self {
        Self { levels: vec![LevelProfile::default(); n_levels], total: Duration::ZERO, cycles: 0 }
    }

    pub fn accumulate(&mut self, o: &VCycleProfile) {
        if self.levels.len() < o.levels.len() {
            self.levels.resize(o.levels.len(), LevelProfile::default());
        }
        for (a, b) in self.levels.iter_mut().zip(&o.levels) {
            a.add(b);
        }
        self.total += o.total;
        self.cycles += o.cycles;
    }

    /// Sum of all component times over all levels.
    pub fn component_sum(&self) -> Duration {
        self.levels.iter().map(|l| l.sum()).sum()
    }

    /// Restriction plus prolongation time over all levels.
    pub fn transfer_time(&self) -> Duration {
        self.levels.iter().map(|l| l.restrict + l.prolongate.evaluation + l.prolongate.gather_scatter).sum()
    }
}
