//! CSV serialization of run reports. Every table starts with `#` header
//! lines describing the run, followed by one header row.

use std::io::{self, Write};

use nnmg::metrics::write_stats_csv;
use nnmg::multigrid::COMPONENTS;

use crate::run::{Report, RunRow};

pub const SCHEMA_VERSION: u32 = 1;

/// Six significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

fn run_header(report: &Report, table: &str, out: &mut impl Write) -> io::Result<()> {
    let c = &report.config;
    writeln!(out, "# nnmg-bench {table} schema={SCHEMA_VERSION}")?;
    writeln!(
        out,
        "# case={} dim={} mode={} transfer={} coarse={} reduction={} smoother-degree={} smoothing-range={} pre-steps={} post-steps={} seed={}",
        c.case,
        c.dim,
        c.mode,
        c.transfer,
        c.coarse,
        sci(c.reduction),
        c.smoother_degree,
        sci(c.smoothing_range),
        c.pre_steps,
        c.post_steps,
        c.seed
    )?;
    if !c.mesh.is_empty() {
        let names: Vec<String> = c.mesh.iter().map(|p| p.display().to_string()).collect();
        writeln!(out, "# meshes={}", names.join(";"))?;
    }
    if let Some((lambda, mu)) = report.lame {
        writeln!(out, "# lambda={} mu={}", sci(lambda), sci(mu))?;
    }
    Ok(())
}

fn component_times(row: &RunRow) -> [f64; 6] {
    let mut t = [0.0; 6];
    for level in &row.profile.levels {
        for (acc, d) in t.iter_mut().zip(level.components()) {
            *acc += d.as_secs_f64();
        }
    }
    t
}

/// Result table: one row per solve. Times are in seconds; component times
/// are summed over levels and V-cycles.
pub fn write_results(report: &Report, mut out: impl Write) -> io::Result<()> {
    run_header(report, "results", &mut out)?;
    writeln!(out, "levels,p,n_dofs,iterations,converged,setup_s,solve_s,vcycle_s,{}", COMPONENTS.join(","))?;
    for r in &report.runs {
        write!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.levels,
            r.degree,
            r.n_dofs,
            r.iterations,
            r.converged,
            sci(r.setup_seconds),
            sci(r.solve_seconds),
            sci(r.profile.total.as_secs_f64())
        )?;
        for t in component_times(r) {
            write!(out, ",{}", sci(t))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Per-level V-cycle profile; prolongation is split into evaluation and
/// gather/scatter. A report without solves yields only the header.
pub fn write_profile(report: &Report, mut out: impl Write) -> io::Result<()> {
    run_header(report, "profile", &mut out)?;
    writeln!(
        out,
        "levels,p,level,label,cycles,{},prolongate_eval,prolongate_gather_scatter",
        COMPONENTS.join(",")
    )?;
    for r in &report.runs {
        for (i, level) in r.profile.levels.iter().enumerate() {
            write!(out, "{},{},{i},{},{}", r.levels, r.degree, r.level_labels.get(i).map_or("", String::as_str), r.profile.cycles)?;
            for d in level.components() {
                write!(out, ",{}", sci(d.as_secs_f64()))?;
            }
            writeln!(
                out,
                ",{},{}",
                sci(level.prolongate.evaluation.as_secs_f64()),
                sci(level.prolongate.gather_scatter.as_secs_f64())
            )?;
        }
    }
    Ok(())
}

/// Partition statistics: `levels,wl,wl-eff,v-eff`, with the rank count and
/// policy in the header lines.
pub fn write_metrics(report: &Report, mut out: impl Write) -> io::Result<()> {
    run_header(report, "metrics", &mut out)?;
    writeln!(out, "# ranks={} policy={}", report.config.ranks, report.config.policy)?;
    write_stats_csv(&report.metrics, out)
}
