//! V-cycle over a hierarchy of levels connected by arbitrary transfers, used
//! as a preconditioner for conjugate gradients.
//!
//! Levels are indexed from the coarsest (`0`) to the finest. Each level owns
//! its matrix-free operator and Chebyshev–Jacobi smoother; `transfers[i]`
//! maps level `i` to level `i + 1`.

mod build;
mod profile;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::Instant;

pub use build::{build_hp_hierarchy, CoarseningMode, HierarchyConfig, TransferKind};
pub use profile::{LevelProfile, VCycleProfile, COMPONENTS};

use crate::error::{Error, Result};
use crate::linalg::LinearOperator;
use crate::mfoperator::MatrixFreeOperator;
use crate::solvers::{
    pcg, CgConfig, ChebyshevConfig, ChebyshevJacobi, CoarseSolver, Preconditioner, SolveResult, DIRECT_MAX_DOFS,
};
use crate::transfer::Transfer;

pub struct Level {
    pub op: MatrixFreeOperator,
    pub smoother: ChebyshevJacobi,
    /// Short description such as `Q2(T1)`.
    pub label: String,
}

impl Level {
    pub fn new(op: MatrixFreeOperator, cfg: &ChebyshevConfig, label: impl Into<String>) -> Self {
        let diag = op.compute_diagonal();
        let smoother = ChebyshevJacobi::new(&op, &diag, Some(op.constraints().mask()), cfg);
        Self { op, smoother, label: label.into() }
    }

    pub fn n_dofs(&self) -> usize {
        self.op.n_dofs()
    }
}

pub struct MultigridHierarchy {
    levels: Vec<Level>,
    transfers: Vec<Box<dyn Transfer>>,
    coarse: CoarseSolver,
    pre_steps: usize,
    post_steps: usize,
    profiling: AtomicBool,
    profile: Mutex<VCycleProfile>,
}

impl std::fmt::Debug for MultigridHierarchy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultigridHierarchy")
            .field("levels", &self.levels.iter().map(|l| (&l.label, l.n_dofs())).collect::<Vec<_>>())
            .field("transfers", &self.transfers.iter().map(|t| t.name()).collect::<Vec<_>>())
            .field("pre_steps", &self.pre_steps)
            .field("post_steps", &self.post_steps)
            .finish()
    }
}

impl MultigridHierarchy {
    /// Checks that every transfer matches the sizes of its two levels and
    /// sets up the coarse solver on level 0.
    pub fn new(levels: Vec<Level>, transfers: Vec<Box<dyn Transfer>>, pre_steps: usize, post_steps: usize) -> Result<Self> {
        Self::with_direct_limit(levels, transfers, pre_steps, post_steps, DIRECT_MAX_DOFS)
    }

    /// As [`MultigridHierarchy::new`], factoring the coarse system densely
    /// only if it has at most `direct_limit` DoFs.
    pub fn with_direct_limit(
        levels: Vec<Level>,
        transfers: Vec<Box<dyn Transfer>>,
        pre_steps: usize,
        post_steps: usize,
        direct_limit: usize,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::IncompatibleSpaces("hierarchy without levels".into()));
        }
        if transfers.len() + 1 != levels.len() {
            return Err(Error::IncompatibleSpaces(format!(
                "{} levels need {} transfers, got {}",
                levels.len(),
                levels.len() - 1,
                transfers.len()
            )));
        }
        for (i, t) in transfers.iter().enumerate() {
            if t.n_coarse() != levels[i].n_dofs() || t.n_fine() != levels[i + 1].n_dofs() {
                return Err(Error::IncompatibleSpaces(format!(
                    "transfer {i} maps {} -> {}, levels have {} and {} DoFs",
                    t.n_coarse(),
                    t.n_fine(),
                    levels[i].n_dofs(),
                    levels[i + 1].n_dofs()
                )));
            }
        }
        let coarse = CoarseSolver::with_direct_limit(&levels[0].op, direct_limit)?;
        let n = levels.len();
        Ok(Self {
            levels,
            transfers,
            coarse,
            pre_steps,
            post_steps,
            profiling: AtomicBool::new(false),
            profile: Mutex::new(VCycleProfile::new(n)),
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &Level {
        &self.levels[l]
    }

    pub fn finest(&self) -> &Level {
        self.levels.last().unwrap()
    }

    pub fn transfers(&self) -> &[Box<dyn Transfer>] {
        &self.transfers
    }

    pub fn coarse_solver(&self) -> &CoarseSolver {
        &self.coarse
    }

    pub fn smoothing_steps(&self) -> (usize, usize) {
        (self.pre_steps, self.post_steps)
    }

    /// Turns per-component timing on or off and clears the recorded profile.
    pub fn set_profiling(&self, on: bool) {
        self.profiling.store(on, Ordering::Relaxed);
        self.reset_profile();
    }

    pub fn reset_profile(&self) {
        *self.profile.lock().unwrap() = VCycleProfile::new(self.levels.len());
    }

    pub fn profile(&self) -> VCycleProfile {
        self.profile.lock().unwrap().clone()
    }

    /// Returns the correction `δ` of one V-cycle on level `l` for the right
    /// hand side `f`.
    pub fn v_cycle(&self, l: usize, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.levels[l].n_dofs() {
            return Err(Error::SizeMismatch { expected: self.levels[l].n_dofs(), got: f.len() });
        }
        let mut x = vec![0.0; f.len()];
        if self.profiling.load(Ordering::Relaxed) {
            let mut prof = VCycleProfile::new(self.levels.len());
            let t = Instant::now();
            self.cycle(l, f, &mut x, Some(&mut prof))?;
            prof.total = t.elapsed();
            prof.cycles = 1;
            self.profile.lock().unwrap().accumulate(&prof);
        } else {
            self.cycle(l, f, &mut x, None)?;
        }
        Ok(x)
    }

    fn cycle(&self, l: usize, f: &[f64], x: &mut [f64], mut prof: Option<&mut VCycleProfile>) -> Result<()> {
        let level = &self.levels[l];
        let op = &level.op;
        if l == 0 {
            let t = Instant::now();
            self.coarse.solve(op, f, x)?;
            if let Some(p) = prof {
                p.levels[0].coarse_solve += t.elapsed();
            }
            return Ok(());
        }
        let n = f.len();
        let mut t = Instant::now();
        level.smoother.smooth(op, f, x, self.pre_steps, true);
        if let Some(p) = prof.as_deref_mut() {
            p.levels[l].pre_smooth += t.elapsed();
            t = Instant::now();
        }
        let mut r = vec![0.0; n];
        op.apply(x, &mut r);
        for (r, f) in r.iter_mut().zip(f) {
            *r = f - *r;
        }
        if let Some(p) = prof.as_deref_mut() {
            p.levels[l].residual += t.elapsed();
            t = Instant::now();
        }
        let transfer = &self.transfers[l - 1];
        let mut rc = vec![0.0; transfer.n_coarse()];
        transfer.restrict(&r, &mut rc);
        if let Some(p) = prof.as_deref_mut() {
            p.levels[l].restrict += t.elapsed();
        }
        let mut dc = vec![0.0; rc.len()];
        self.cycle(l - 1, &rc, &mut dc, prof.as_deref_mut())?;
        let t = Instant::now();
        match prof.as_deref_mut() {
            Some(p) => {
                let split = transfer.profile_prolongate(&dc, &mut r);
                let t_add = Instant::now();
                for (x, d) in x.iter_mut().zip(&r) {
                    *x += d;
                }
                p.levels[l].prolongate.evaluation += split.evaluation;
                p.levels[l].prolongate.gather_scatter += split.gather_scatter + t_add.elapsed();
            }
            None => {
                transfer.prolongate(&dc, &mut r);
                for (x, d) in x.iter_mut().zip(&r) {
                    *x += d;
                }
            }
        }
        let t = if prof.is_some() { Instant::now() } else { t };
        level.smoother.smooth(op, f, x, self.post_steps, false);
        if let Some(p) = prof {
            p.levels[l].post_smooth += t.elapsed();
        }
        Ok(())
    }

    /// CG on the finest level, preconditioned by one V-cycle per iteration.
    pub fn solve(&self, b: &[f64], x: &mut [f64], cfg: &CgConfig) -> Result<SolveResult> {
        pcg(&self.finest().op, self, b, x, cfg)
    }
}

impl Preconditioner for MultigridHierarchy {
    fn precondition(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let d = self.v_cycle(self.levels.len() - 1, r)?;
        z.copy_from_slice(&d);
        Ok(())
    }
}

#[cfg(test)]
mod tests;
