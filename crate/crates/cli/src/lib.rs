//! Benchmark harness: resolves a configuration, runs the requested case and
//! writes CSV tables.

pub mod config;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;

use config::{parse_file, BenchmarkConfig, Cli, FileConfig};
use run::{run_case, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

fn write_to(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()
}

enum Resolved {
    Run(Box<BenchmarkConfig>),
    /// Help or version text.
    Info(String),
}

fn resolve(args: Vec<OsString>) -> Result<Resolved, String> {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(Resolved::Info(e.to_string()))
        }
        Err(e) => return Err(e.to_string()),
    };
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_file(&text).map_err(|e| e.0)?
        }
        None => FileConfig::default(),
    };
    BenchmarkConfig::resolve(cli, file).map(|c| Resolved::Run(Box::new(c))).map_err(|e| e.0)
}

fn execute(cfg: &BenchmarkConfig, stdout: &mut impl Write) -> Result<bool, RunError> {
    if let Some(n) = cfg.threads {
        // the global pool can only be set once per process; later calls keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = run_case(cfg)?;
    match &cfg.out {
        Some(p) => write_to(p, |w| report::write_results(&report, w))?,
        None if cfg.case != config::Case::MetricsOnly => report::write_results(&report, &mut *stdout)?,
        None => {}
    }
    if let Some(p) = &cfg.profile_out {
        write_to(p, |w| report::write_profile(&report, w))?;
    }
    match &cfg.metrics_out {
        Some(p) => write_to(p, |w| report::write_metrics(&report, w))?,
        None if !report.metrics.is_empty() && cfg.out.is_some() => {}
        None if !report.metrics.is_empty() => report::write_metrics(&report, &mut *stdout)?,
        None => {}
    }
    Ok(report.all_converged())
}

/// Runs the harness with `args` (program name first) and returns the exit
/// code: 0 on success, 1 on configuration errors, 2 on solver failures.
pub fn main_with(args: Vec<OsString>, stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    let cfg = match resolve(args) {
        Ok(Resolved::Run(c)) => c,
        Ok(Resolved::Info(text)) => {
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
        Err(msg) => {
            let _ = writeln!(stderr, "{}", msg.trim_end());
            return EXIT_CONFIG;
        }
    };
    match execute(&cfg, stdout) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "solver failure: CG did not reach the requested reduction");
            EXIT_SOLVER
        }
        Err(e @ RunError::Solver(_)) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_SOLVER
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_CONFIG
        }
    }
}
