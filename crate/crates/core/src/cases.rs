//! Mesh families and solver drivers for the benchmark problems: nested
//! hypercubes, non-nested L-shape / Fichera hierarchies, a perturbed cube
//! and a clamped elastic cube.

use std::sync::Arc;
use std::time::Instant;

use crate::error::Result;
use crate::mesh::{generate_hypercube, generate_perturbed, lshape_graded, Mesh, Point};
use crate::mfoperator::{assemble_rhs, lame_parameters, Physics};
use crate::multigrid::{build_hp_hierarchy, HierarchyConfig, MultigridHierarchy, VCycleProfile};
use crate::solvers::CgConfig;

/// Relative amplitude of the interior vertex perturbation in non-nested families.
pub const PERTURBATION: f64 = 0.25;
/// Corner refinement rounds applied to every L-shape / Fichera level.
pub const CORNER_ROUNDS: usize = 2;
/// Default seed of the perturbed families; level `k` uses `seed + k`.
pub const DEFAULT_SEED: u64 = 1000;

/// `[-1,1]^dim` refined `0, 1, …, n_levels - 1` times.
pub fn nested_hypercube(dim: usize, n_levels: usize) -> Result<Vec<Arc<Mesh>>> {
    (0..n_levels).map(|r| Ok(Arc::new(generate_hypercube(dim, -1.0, 1.0, r)?.with_level_id(r)))).collect()
}

/// Independently perturbed L-shape (2D) or Fichera (3D) meshes; level `k`
/// (from 1) has `k - 1` uniform refinements plus the corner bands.
pub fn lshape_family(dim: usize, n_levels: usize, seed: u64) -> Result<Vec<Arc<Mesh>>> {
    (1..=n_levels)
        .map(|k| {
            let base = lshape_graded(dim, k - 1, CORNER_ROUNDS, 2)?;
            Ok(Arc::new(generate_perturbed(&base, PERTURBATION, seed + k as u64)?.with_level_id(k - 1)))
        })
        .collect()
}

/// Independently perturbed `[lo, hi]^dim` meshes with `0, …, n_levels - 1`
/// refinements; the coarsest level is left unperturbed.
pub fn perturbed_hypercube(dim: usize, lo: f64, hi: f64, n_levels: usize, seed: u64) -> Result<Vec<Arc<Mesh>>> {
    (0..n_levels)
        .map(|r| {
            let base = generate_hypercube(dim, lo, hi, r)?;
            let amplitude = if r == 0 { 0.0 } else { PERTURBATION };
            Ok(Arc::new(generate_perturbed(&base, amplitude, seed + r as u64)?.with_level_id(r)))
        })
        .collect()
}

/// Steel cube `[0,1]^3` clamped at `z = 0` (id 4) with a pressure load on `z = 1` (id 5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedCube {
    pub young: f64,
    pub poisson: f64,
    /// Normal traction magnitude in Pa; the load is `-pressure · n`.
    pub pressure: f64,
}

impl Default for ClampedCube {
    fn default() -> Self {
        Self { young: 205e9, poisson: 0.3, pressure: 1e5 }
    }
}

impl ClampedCube {
    pub const CLAMPED_ID: u32 = 4;
    pub const LOADED_ID: u32 = 5;

    pub fn lame(&self) -> (f64, f64) {
        lame_parameters(self.young, self.poisson)
    }

    pub fn physics(&self) -> Physics {
        let (lambda, mu) = self.lame();
        Physics::Elasticity { lambda, mu }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub n_levels: usize,
    pub degree: usize,
    pub n_dofs: usize,
    pub iterations: usize,
    pub converged: bool,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub profile: VCycleProfile,
}

/// Right-hand side on the finest level: unit body load for Poisson, top
/// face traction for the clamped cube.
pub fn finest_rhs(h: &MultigridHierarchy, cube: Option<&ClampedCube>) -> Result<Vec<f64>> {
    let op = &h.finest().op;
    match cube {
        None => assemble_rhs(op.space(), op.constraints(), &|_| [1.0, 0.0, 0.0], &[]),
        Some(c) => {
            let p = c.pressure;
            let traction = move |_: &Point| [0.0, 0.0, -p];
            assemble_rhs(op.space(), op.constraints(), &|_| [0.0; 3], &[(ClampedCube::LOADED_ID, &traction)])
        }
    }
}

/// Builds the hierarchy and runs multigrid-preconditioned CG from zero.
pub fn solve(
    meshes: &[Arc<Mesh>],
    cfg: &HierarchyConfig,
    cg: &CgConfig,
    cube: Option<&ClampedCube>,
    profile: bool,
) -> Result<(SolveReport, Vec<f64>)> {
    let t = Instant::now();
    let h = build_hp_hierarchy(meshes, cfg)?;
    let rhs = finest_rhs(&h, cube)?;
    let setup_seconds = t.elapsed().as_secs_f64();
    h.set_profiling(profile);
    let mut x = vec![0.0; rhs.len()];
    let t = Instant::now();
    let res = h.solve(&rhs, &mut x, cg)?;
    let solve_seconds = t.elapsed().as_secs_f64();
    let report = SolveReport {
        n_levels: meshes.len(),
        degree: cfg.degree,
        n_dofs: rhs.len(),
        iterations: res.iterations,
        converged: res.converged,
        setup_seconds,
        solve_seconds,
        profile: h.profile(),
    };
    Ok((report, x))
}
