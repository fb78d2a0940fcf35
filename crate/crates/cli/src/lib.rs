//! Scenario runner behind the `wk` binary: configuration, trajectory output,
//! verification reports and parameter sweeps.

pub mod catalog;
pub mod config;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use wk_core::dynamics::{integrate, Trajectory};
use wk_core::verify::{run_suite, CheckReport, Suite, VerifyOptions};

use config::{Format, ScenarioConfig};
use output::RunSummary;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_TRUNCATED: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        EXIT_CONFIG
    }
}

/// Command-line overrides of the config's `output` block.
#[derive(Debug, Clone, Default)]
pub struct OutputOverrides {
    pub format: Option<Format>,
    pub plot_data: bool,
}

/// Integrates one config. Errors here are configuration errors; failures
/// during the flow come back as a truncated trajectory.
pub fn run_config(cfg: &ScenarioConfig) -> Result<Trajectory, CliError> {
    let run = cfg.build()?;
    integrate(&run.chart, &run.initial, run.lagrangian.as_ref(), &run.integrator)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Paths written by [`cmd_integrate`].
#[derive(Debug, Clone)]
pub struct IntegrateOutput {
    pub trajectory: PathBuf,
    pub diagnostics: PathBuf,
    pub summary: PathBuf,
    pub plot_data: Option<PathBuf>,
    pub truncated: bool,
}

impl IntegrateOutput {
    pub fn exit_code(&self) -> u8 {
        if self.truncated {
            EXIT_TRUNCATED
        } else {
            EXIT_OK
        }
    }
}

/// Writes the trajectory, `diagnostics.json`, a one-row `summary.csv` and,
/// on request, gnuplot data into `out_dir`.
pub fn cmd_integrate(cfg: &ScenarioConfig, out_dir: &Path, overrides: &OutputOverrides) -> Result<IntegrateOutput, CliError> {
    let traj = run_config(cfg)?;
    let dim = cfg.chart.build().map_err(|e| CliError::Config(e.to_string()))?.dim();
    std::fs::create_dir_all(out_dir)?;

    let spec = &cfg.output;
    let format = overrides.format.unwrap_or(spec.format);
    let trajectory_name = match format {
        Format::Csv => format!("{}.csv", spec.trajectory),
        Format::Json => format!("{}.jsonl", spec.trajectory),
    };
    let mut w = create(out_dir, &trajectory_name)?;
    match format {
        Format::Csv => output::write_trajectory_csv(&mut w, &traj, dim)?,
        Format::Json => output::write_trajectory_jsonl(&mut w, &traj)?,
    }
    w.flush()?;

    let plot_data = if overrides.plot_data || spec.plot_data {
        let name = format!("{}.dat", spec.trajectory);
        let mut w = create(out_dir, &name)?;
        output::write_plot_data(&mut w, &traj, dim)?;
        w.flush()?;
        Some(out_dir.join(name))
    } else {
        None
    };

    let summary = RunSummary::from_trajectory(&traj);
    let mut w = create(out_dir, "summary.csv")?;
    output::write_summary_csv(&mut w, &[], [(Vec::new(), &summary)])?;
    w.flush()?;

    let doc = output::diagnostics_json(cfg.name.as_deref(), &traj, &summary);
    let mut w = create(out_dir, &spec.diagnostics)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;

    Ok(IntegrateOutput {
        trajectory: out_dir.join(trajectory_name),
        diagnostics: out_dir.join(&spec.diagnostics),
        summary: out_dir.join("summary.csv"),
        plot_data,
        truncated: !traj.is_complete(),
    })
}

/// Runs a suite and streams one JSON report per check to `out`.
pub fn cmd_verify(suite: Suite, opts: &VerifyOptions, mut out: impl Write) -> Result<(Vec<CheckReport>, u8), CliError> {
    let reports = run_suite(suite, opts);
    for r in &reports {
        writeln!(out, "{}", serde_json::to_string(r).map_err(std::io::Error::from)?)?;
    }
    let code = if reports.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok((reports, code))
}

/// One sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub summary: RunSummary,
}

/// Runs every sweep point on a pool of `jobs` threads. Rows come back in
/// input order and a failing run only marks its own row.
pub fn sweep_rows(cfg: &ScenarioConfig, jobs: usize) -> Result<Vec<SweepRow>, CliError> {
    let sweep = cfg
        .sweep
        .ok_or_else(|| CliError::Config("sweep: the config has no sweep block".into()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build a pool of {jobs} threads: {e}")))?;
    let values = sweep.values();
    Ok(pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| {
                let point = cfg.with_parameter(sweep.parameter, value);
                let summary = match run_config(&point) {
                    Ok(traj) => RunSummary::from_trajectory(&traj),
                    Err(e) => RunSummary::failed(e.to_string()),
                };
                SweepRow { index, value, summary }
            })
            .collect()
    }))
}

/// Writes `sweep_summary.csv` into `out_dir` and returns its path.
pub fn cmd_sweep(cfg: &ScenarioConfig, out_dir: &Path, jobs: usize) -> Result<(PathBuf, Vec<SweepRow>), CliError> {
    let rows = sweep_rows(cfg, jobs)?;
    let parameter = cfg.sweep.map(|s| s.parameter.to_string()).unwrap_or_default();
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("sweep_summary.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    output::write_summary_csv(
        &mut w,
        &["index", "parameter", "value"],
        rows.iter()
            .map(|r| (vec![r.index.to_string(), parameter.clone(), format!("{:e}", r.value)], &r.summary)),
    )?;
    w.flush()?;
    Ok((path, rows))
}
