//! Executes a resolved configuration: mesh hierarchies, solves and
//! partition statistics.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use nnmg::cases::{finest_rhs, lshape_family, nested_hypercube, perturbed_hypercube, ClampedCube};
use nnmg::fespace::{dirichlet_constraints, FESpace};
use nnmg::geosearch::SearchConfig;
use nnmg::mesh::read_msh;
use nnmg::metrics::{partition, vertical_efficiency, workload_stats, PartitionPolicy, PartitionStats};
use nnmg::multigrid::{build_hp_hierarchy, CoarseningMode, HierarchyConfig, TransferKind, VCycleProfile};
use nnmg::solvers::{CgConfig, ChebyshevConfig, DIRECT_MAX_DOFS};
use nnmg::transfer::NonNestedTransfer;
use nnmg::{Mesh, PartitionLabels};

use crate::config::{BenchmarkConfig, Case, CoarseChoice, Mode, Policy, TransferChoice, MAX_DOFS};

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Solver(nnmg::Error),
    Io(std::io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Solver(e) => write!(f, "solver failure: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<nnmg::Error> for RunError {
    fn from(e: nnmg::Error) -> Self {
        match e {
            nnmg::Error::Config(m) => RunError::Config(m),
            e @ (nnmg::Error::TooManyRanks { .. }
            | nnmg::Error::Io(_)
            | nnmg::Error::MshParse { .. }
            | nnmg::Error::UnsupportedElementType(_)
            | nnmg::Error::InvalidMesh(_)
            | nnmg::Error::UnknownBoundaryId(_)) => RunError::Config(e.to_string()),
            e => RunError::Solver(e),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// One solve of the sweep.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub levels: usize,
    pub degree: usize,
    pub n_dofs: usize,
    pub iterations: usize,
    pub converged: bool,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    /// Labels of the hierarchy levels, coarsest first.
    pub level_labels: Vec<String>,
    pub profile: VCycleProfile,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: BenchmarkConfig,
    /// Lamé parameters `(λ, μ)` of elasticity runs.
    pub lame: Option<(f64, f64)>,
    pub runs: Vec<RunRow>,
    /// Partition statistics per hierarchy size.
    pub metrics: Vec<(usize, PartitionStats)>,
}

impl Report {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }
}

fn cube(cfg: &BenchmarkConfig) -> Option<ClampedCube> {
    matches!(cfg.case, Case::ElasticityClamped).then(ClampedCube::default)
}

fn hierarchy_config(cfg: &BenchmarkConfig, degree: usize) -> HierarchyConfig {
    let (physics, dirichlet_ids) = match cube(cfg) {
        Some(c) => (c.physics(), Some(vec![ClampedCube::CLAMPED_ID])),
        None => (nnmg::mfoperator::Physics::Laplace, None),
    };
    HierarchyConfig {
        degree,
        mode: match cfg.mode {
            Mode::Hp => CoarseningMode::Hp,
            Mode::H => CoarseningMode::HOnly,
        },
        transfer: match cfg.transfer {
            TransferChoice::NonNested => TransferKind::NonNested,
            TransferChoice::Nested => TransferKind::Nested,
        },
        physics,
        dirichlet_ids,
        smoother: ChebyshevConfig {
            degree: cfg.smoother_degree,
            smoothing_range: cfg.smoothing_range,
            ..Default::default()
        },
        pre_steps: cfg.pre_steps,
        post_steps: cfg.post_steps,
        search: SearchConfig::default(),
        coarse_direct_limit: match cfg.coarse {
            CoarseChoice::Auto => DIRECT_MAX_DOFS,
            CoarseChoice::Direct => usize::MAX,
            CoarseChoice::Iterative => 0,
        },
    }
}

/// Mesh hierarchy with `n_levels` meshes, coarsest first.
pub fn hierarchy_meshes(cfg: &BenchmarkConfig, n_levels: usize) -> Result<Vec<Arc<Mesh>>, RunError> {
    if !cfg.mesh.is_empty() {
        let meshes = cfg.mesh[..n_levels]
            .iter()
            .enumerate()
            .map(|(i, p)| Ok(Arc::new(read_msh(p)?.with_level_id(i))))
            .collect::<Result<Vec<_>, RunError>>()?;
        if let Some(m) = meshes.iter().find(|m| m.dim() != cfg.dim) {
            return Err(RunError::Config(format!("mesh is {}-dimensional, expected {}", m.dim(), cfg.dim)));
        }
        return Ok(meshes);
    }
    let meshes = match cfg.case {
        Case::NestedSanity2d | Case::NestedSanity3d => nested_hypercube(cfg.dim, n_levels)?,
        Case::Lshape2d | Case::Fichera3d | Case::MetricsOnly => lshape_family(cfg.dim, n_levels, cfg.seed)?,
        Case::PoissonCube | Case::ElasticityClamped => perturbed_hypercube(cfg.dim, 0.0, 1.0, n_levels, cfg.seed)?,
    };
    Ok(meshes)
}

fn solve_one(cfg: &BenchmarkConfig, meshes: &[Arc<Mesh>], degree: usize) -> Result<RunRow, RunError> {
    let finest = meshes.last().expect("at least one level");
    let n_dofs = FESpace::new(finest.clone(), degree, if cube(cfg).is_some() { cfg.dim } else { 1 }).n_dofs();
    if n_dofs > MAX_DOFS {
        return Err(RunError::Config(format!("{n_dofs} unknowns exceed the limit of {MAX_DOFS}")));
    }
    let t = Instant::now();
    let h = build_hp_hierarchy(meshes, &hierarchy_config(cfg, degree))?;
    let rhs = finest_rhs(&h, cube(cfg).as_ref())?;
    let setup_seconds = t.elapsed().as_secs_f64();
    h.set_profiling(true);
    let mut x = vec![0.0; rhs.len()];
    let t = Instant::now();
    let res = h.solve(&rhs, &mut x, &CgConfig { reduction: cfg.reduction, max_iterations: cfg.max_iterations })?;
    let solve_seconds = t.elapsed().as_secs_f64();
    Ok(RunRow {
        levels: meshes.len(),
        degree,
        n_dofs: rhs.len(),
        iterations: res.iterations,
        converged: res.converged,
        setup_seconds,
        solve_seconds,
        level_labels: h.levels().iter().map(|l| l.label.clone()).collect(),
        profile: h.profile(),
    })
}

fn labels_for(mesh: &Mesh, ranks: usize, policy: PartitionPolicy) -> Result<PartitionLabels, RunError> {
    Ok(partition(mesh, ranks.min(mesh.n_cells()), policy)?)
}

/// Partitions every mesh of the hierarchy and measures the vertical
/// efficiency of each consecutive pair with linear transfer points.
///
/// The finest mesh always uses the default split. Under the matching policy
/// each coarser mesh follows the finest partition. Meshes with fewer cells
/// than ranks leave the surplus ranks idle.
pub fn partition_stats(meshes: &[Arc<Mesh>], ranks: usize, policy: Policy) -> Result<PartitionStats, RunError> {
    let finest = meshes.last().expect("at least one level");
    let fine_labels = labels_for(finest, ranks, PartitionPolicy::Default)?;
    let mut labels = Vec::with_capacity(meshes.len());
    for m in &meshes[..meshes.len() - 1] {
        labels.push(match policy {
            Policy::Default => labels_for(m, ranks, PartitionPolicy::Default)?,
            Policy::Matching => labels_for(m, ranks, PartitionPolicy::Matching { fine: finest, fine_labels: &fine_labels })?,
        });
    }
    labels.push(fine_labels);
    let spaces: Vec<Arc<FESpace>> = meshes.iter().map(|m| Arc::new(FESpace::new(m.clone(), 1, 1))).collect();
    let mut vertical = Vec::with_capacity(meshes.len().saturating_sub(1));
    for i in 1..meshes.len() {
        let (cs, fs) = (&spaces[i - 1], &spaces[i]);
        let cc = dirichlet_constraints(cs, &cs.mesh().boundary_ids(), |_, _| 0.0)?;
        let fc = dirichlet_constraints(fs, &fs.mesh().boundary_ids(), |_, _| 0.0)?;
        let t = NonNestedTransfer::setup(cs.clone(), &cc, fs.clone(), &fc, &SearchConfig::default())?;
        vertical.push(vertical_efficiency(&labels[i - 1], fs, &labels[i], t.points()));
    }
    Ok(workload_stats(&labels, vertical)?)
}

/// Runs the whole degree × level sweep.
pub fn run_case(cfg: &BenchmarkConfig) -> Result<Report, RunError> {
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    let want_metrics = cfg.ranks > 1 || cfg.metrics_out.is_some() || cfg.case == Case::MetricsOnly;
    let mut report = Report { config: cfg.clone(), lame: cube(cfg).map(|c| c.lame()), runs: Vec::new(), metrics: Vec::new() };
    for &l in &cfg.levels {
        let meshes = hierarchy_meshes(cfg, l)?;
        if want_metrics {
            report.metrics.push((l, partition_stats(&meshes, cfg.ranks, cfg.policy)?));
        }
        if cfg.case == Case::MetricsOnly {
            continue;
        }
        for &p in &cfg.degrees {
            report.runs.push(solve_one(cfg, &meshes, p)?);
        }
    }
    Ok(report)
}
