//! Benchmark configuration: TOML file and command-line flags, merged and
//! validated before anything runs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use serde::{Deserialize, Deserializer};

/// Largest finest-level system a run may build.
pub const MAX_DOFS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "String")]
pub enum Case {
    NestedSanity2d,
    NestedSanity3d,
    Lshape2d,
    Fichera3d,
    PoissonCube,
    ElasticityClamped,
    MetricsOnly,
}

impl Case {
    pub const ALL: [Case; 7] = [
        Case::NestedSanity2d,
        Case::NestedSanity3d,
        Case::Lshape2d,
        Case::Fichera3d,
        Case::PoissonCube,
        Case::ElasticityClamped,
        Case::MetricsOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::NestedSanity2d => "nested-sanity-2d",
            Case::NestedSanity3d => "nested-sanity-3d",
            Case::Lshape2d => "lshape-2d",
            Case::Fichera3d => "fichera-3d",
            Case::PoissonCube => "poisson-cube",
            Case::ElasticityClamped => "elasticity-clamped",
            Case::MetricsOnly => "metrics-only",
        }
    }

    /// Dimension fixed by the case, if any.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            Case::NestedSanity2d | Case::Lshape2d => Some(2),
            Case::NestedSanity3d | Case::Fichera3d | Case::ElasticityClamped => Some(3),
            Case::PoissonCube | Case::MetricsOnly => None,
        }
    }

    fn default_dim(self) -> usize {
        self.fixed_dim().unwrap_or(match self {
            Case::MetricsOnly => 2,
            _ => 3,
        })
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Case::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Case::ALL.iter().map(|c| c.name()).collect();
            format!("unknown case '{s}', expected one of {}", names.join(", "))
        })
    }
}

impl TryFrom<String> for Case {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!("unknown value '{s}', expected one of {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

keyword_enum!(Policy { Default => "default", Matching => "matching" });
keyword_enum!(Mode { Hp => "hp", H => "h" });
keyword_enum!(TransferChoice { NonNested => "non-nested", Nested => "nested" });
keyword_enum!(CoarseChoice { Auto => "auto", Direct => "direct", Iterative => "iterative" });

/// A list of integers written as `3`, `1,2,4` or `2..5` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep(pub Vec<usize>);

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad integer '{t}' in '{s}'"));
            match part.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                    if a > b {
                        return Err(format!("empty range '{part}'"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(num(part)?),
            }
        }
        if out.is_empty() {
            return Err(format!("empty list '{s}'"));
        }
        Ok(Sweep(out))
    }
}

impl<'de> Deserialize<'de> for Sweep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(usize),
            Many(Vec<usize>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::One(v) => Ok(Sweep(vec![v])),
            Raw::Many(v) if !v.is_empty() => Ok(Sweep(v)),
            Raw::Many(_) => Err(serde::de::Error::custom("empty list")),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Keys accepted in a `--config` TOML file; all optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub case: Option<Case>,
    pub dim: Option<usize>,
    pub degree: Option<Sweep>,
    pub levels: Option<Sweep>,
    pub ranks: Option<usize>,
    pub policy: Option<Policy>,
    pub reduction: Option<f64>,
    pub max_iterations: Option<usize>,
    pub smoother_degree: Option<usize>,
    pub smoothing_range: Option<f64>,
    pub pre_steps: Option<usize>,
    pub post_steps: Option<usize>,
    pub mode: Option<Mode>,
    pub transfer: Option<TransferChoice>,
    pub coarse: Option<CoarseChoice>,
    pub out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub profile_out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub mesh: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "nnmg-bench", version, about = "Runs multigrid benchmark cases and writes CSV tables")]
pub struct Cli {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// nested-sanity-2d, nested-sanity-3d, lshape-2d, fichera-3d, poisson-cube, elasticity-clamped or metrics-only.
    #[arg(long)]
    pub case: Option<Case>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Polynomial degrees, e.g. `2` or `1..4`.
    #[arg(long)]
    pub degree: Option<Sweep>,
    /// Numbers of levels, e.g. `4` or `2..6`.
    #[arg(long)]
    pub levels: Option<Sweep>,
    #[arg(long)]
    pub ranks: Option<usize>,
    /// default or matching.
    #[arg(long)]
    pub policy: Option<Policy>,
    /// Relative residual reduction of CG.
    #[arg(long)]
    pub reduction: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub smoother_degree: Option<usize>,
    #[arg(long)]
    pub smoothing_range: Option<f64>,
    #[arg(long)]
    pub pre_steps: Option<usize>,
    #[arg(long)]
    pub post_steps: Option<usize>,
    /// hp (polynomial levels below the coarsest mesh) or h.
    #[arg(long)]
    pub mode: Option<Mode>,
    /// non-nested or nested.
    #[arg(long)]
    pub transfer: Option<TransferChoice>,
    /// auto, direct or iterative.
    #[arg(long)]
    pub coarse: Option<CoarseChoice>,
    /// Results CSV; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Partition statistics CSV.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Per-level V-cycle timing CSV.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the numeric kernels.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Gmsh meshes forming the hierarchy, coarsest first; repeat the flag.
    #[arg(long)]
    pub mesh: Vec<PathBuf>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub case: Case,
    pub dim: usize,
    pub degrees: Vec<usize>,
    pub levels: Vec<usize>,
    pub ranks: usize,
    pub policy: Policy,
    pub reduction: f64,
    pub max_iterations: usize,
    pub smoother_degree: usize,
    pub smoothing_range: f64,
    pub pre_steps: usize,
    pub post_steps: usize,
    pub mode: Mode,
    pub transfer: TransferChoice,
    pub coarse: CoarseChoice,
    pub out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub profile_out: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub mesh: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_file(text: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(format!("config file: {e}")))
}

impl BenchmarkConfig {
    /// Merges flags over the file and applies defaults.
    pub fn resolve(cli: Cli, file: FileConfig) -> Result<Self, ConfigError> {
        let case = cli.case.or(file.case).ok_or_else(|| ConfigError("no case given (use --case)".into()))?;
        let mesh = if cli.mesh.is_empty() { file.mesh.unwrap_or_default() } else { cli.mesh };
        let cfg = Self {
            case,
            dim: cli.dim.or(file.dim).unwrap_or(case.default_dim()),
            degrees: cli.degree.or(file.degree).map_or(vec![2], |s| s.0),
            levels: cli.levels.or(file.levels).map_or(vec![if mesh.is_empty() { 3 } else { mesh.len() }], |s| s.0),
            ranks: cli.ranks.or(file.ranks).unwrap_or(1),
            policy: cli.policy.or(file.policy).unwrap_or(Policy::Default),
            reduction: cli.reduction.or(file.reduction).unwrap_or(1e-4),
            max_iterations: cli.max_iterations.or(file.max_iterations).unwrap_or(1000),
            smoother_degree: cli.smoother_degree.or(file.smoother_degree).unwrap_or(3),
            smoothing_range: cli.smoothing_range.or(file.smoothing_range).unwrap_or(30.0),
            pre_steps: cli.pre_steps.or(file.pre_steps).unwrap_or(2),
            post_steps: cli.post_steps.or(file.post_steps).unwrap_or(2),
            mode: cli.mode.or(file.mode).unwrap_or(Mode::Hp),
            transfer: cli.transfer.or(file.transfer).unwrap_or(TransferChoice::NonNested),
            coarse: cli.coarse.or(file.coarse).unwrap_or(CoarseChoice::Auto),
            out: cli.out.or(file.out),
            metrics_out: cli.metrics_out.or(file.metrics_out),
            profile_out: cli.profile_out.or(file.profile_out),
            seed: cli.seed.or(file.seed).unwrap_or(nnmg::cases::DEFAULT_SEED),
            threads: cli.threads.or(file.threads),
            mesh,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        if let Some(d) = self.case.fixed_dim() {
            if d != self.dim {
                return err(format!("case {} is {d}-dimensional, got dim {}", self.case, self.dim));
            }
        }
        if self.dim != 2 && self.dim != 3 {
            return err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if let Some(p) = self.degrees.iter().find(|p| !(1..=4).contains(*p)) {
            return err(format!("degree must be in 1..4, got {p}"));
        }
        if let Some(l) = self.levels.iter().find(|l| **l == 0) {
            return err(format!("levels must be at least 1, got {l}"));
        }
        if !self.mesh.is_empty() {
            if self.levels.iter().any(|&l| l > self.mesh.len()) {
                return err(format!("{} mesh files cannot provide {:?} levels", self.mesh.len(), self.levels));
            }
            if matches!(self.case, Case::ElasticityClamped) {
                return err("mesh files are only supported for Poisson cases".into());
            }
        }
        if self.ranks == 0 {
            return err("ranks must be at least 1".into());
        }
        if !(self.reduction > 0.0 && self.reduction < 1.0) {
            return err(format!("reduction must lie in (0, 1), got {}", self.reduction));
        }
        if self.max_iterations == 0 || self.smoother_degree == 0 {
            return err("max-iterations and smoother-degree must be positive".into());
        }
        if !self.smoothing_range.is_finite() || self.smoothing_range <= 1.0 {
            return err(format!("smoothing-range must exceed 1, got {}", self.smoothing_range));
        }
        if self.threads == Some(0) {
            return err("threads must be at least 1".into());
        }
        Ok(())
    }
}
