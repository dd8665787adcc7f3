//! Configuration, initial data, run orchestration, sweeps, output and
//! checkpoints.

pub mod check;
pub mod config;
pub mod initial;
pub mod io;
pub mod sweep;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use check::{run_identity_suite, CheckItem, CheckReport};
pub use config::{load_config, parse_config, RunSpec};
pub use initial::{make_initial_data, InitialData};
pub use io::{read_checkpoint, read_checkpoint_with, read_timeseries, write_checkpoint, write_timeseries};
pub use sweep::{parse_axis, sweep, Axis, CellReport};

use crate::diagnostics::{monitors_for, DiagnosticsEngine, DiagnosticsRecord, Monitor, RecordingSink};
use crate::error::{Error, Result};
use crate::spectral::make_grid;
use crate::timestepper::{run, RunReport, StepperConfig};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const CHECKPOINT_FILE: &str = "final.chk";
pub const CONFIG_FILE: &str = "config.resolved";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub records: Vec<DiagnosticsRecord>,
    pub monitor_labels: Vec<String>,
}

pub fn monitors(spec: &RunSpec) -> Vec<Monitor> {
    monitors_for(&spec.monitored_sobolev_exponents)
}

/// Builds the initial data, runs to `stepper.t_end` and, when an output
/// directory is set, writes the time series, resolved configuration,
/// summary and final checkpoint into it.
pub fn run_spec(spec: &RunSpec) -> Result<RunOutcome> {
    let grid = make_grid(spec.grid_n)?;
    let initial = make_initial_data(&spec.initial_data, &grid, &spec.system)?;
    let monitors = monitors(spec);
    let labels: Vec<String> = monitors.iter().map(Monitor::label).collect();
    let engine = DiagnosticsEngine::new(&spec.system, monitors, spec.diagnostics);
    let mut sink = RecordingSink::new(engine);
    if let Some(tol) = spec.residual_tolerance {
        sink = sink.with_residual_tolerance(tol);
    }
    let report = run(&initial, &spec.system, &spec.stepper, &mut sink)?;
    let records = sink.into_records();
    if let Some(dir) = &spec.output_dir {
        fs::create_dir_all(dir)?;
        write_timeseries(&records, &labels, &dir.join(TIMESERIES_FILE))?;
        fs::write(dir.join(CONFIG_FILE), spec.to_config_string())?;
        fs::write(dir.join(SUMMARY_FILE), format_run_summary(spec, &report))?;
        if spec.write_final_checkpoint {
            write_checkpoint(&report.final_state, &spec.system, &dir.join(CHECKPOINT_FILE))?;
        }
    }
    Ok(RunOutcome {
        report,
        records,
        monitor_labels: labels,
    })
}

pub fn format_run_summary(spec: &RunSpec, report: &RunReport) -> String {
    let mut s = String::new();
    let sys = &spec.system;
    let _ = writeln!(
        s,
        "variant {} alpha={} beta={} gamma={} g={}",
        sys.variant(),
        sys.alpha(),
        sys.beta(),
        sys.gamma(),
        sys.g().map_or("none", |g| g.family_id())
    );
    let _ = writeln!(s, "covered_regime = {} ({})", report.covered_regime, sys.regime_condition());
    let _ = writeln!(s, "final_time = {}", report.final_time);
    let _ = writeln!(s, "steps = {}", report.steps);
    let _ = writeln!(s, "wall_seconds = {:.3}", report.wall_seconds);
    match &report.blowup {
        Some(b) => {
            let _ = writeln!(s, "blowup = true (t = {}: {})", b.t, b.reason);
        }
        None => {
            let _ = writeln!(s, "blowup = false");
        }
    }
    let _ = writeln!(s, "peak omega_inf = {:.6e}", report.peak_omega_linf);
    for (label, v) in &report.peaks {
        let _ = writeln!(s, "peak {label} = {v:.6e}");
    }
    s
}

/// Continues from a checkpoint to `t_end`. Without a configuration the
/// system comes from the checkpoint header and every other setting is
/// defaulted.
pub fn resume(
    checkpoint: &Path,
    t_end: f64,
    dt: Option<f64>,
    base: Option<RunSpec>,
    output_dir: Option<PathBuf>,
) -> Result<RunOutcome> {
    let chk = io::load_checkpoint(checkpoint)?;
    let mut spec = match base {
        Some(spec) => {
            if spec.grid_n != chk.n {
                return Err(Error::GridMismatch {
                    left: spec.grid_n,
                    right: chk.n,
                });
            }
            spec
        }
        None => {
            let system = chk.system()?;
            let exps = crate::diagnostics::default_sobolev_exponents(&system);
            RunSpec {
                system,
                stepper: StepperConfig::new(0.005, t_end),
                grid_n: chk.n,
                initial_data: InitialData::TaylorGreenMhd { amplitude: 1.0 },
                output_dir: None,
                monitored_sobolev_exponents: exps,
                diagnostics: Default::default(),
                residual_tolerance: None,
                write_final_checkpoint: true,
            }
        }
    };
    spec.initial_data = InitialData::FromCheckpoint(checkpoint.to_path_buf());
    spec.stepper.t_end = t_end;
    if let Some(dt) = dt {
        spec.stepper.dt = dt;
    }
    if output_dir.is_some() {
        spec.output_dir = output_dir;
    }
    if !(t_end > chk.t) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} must exceed the checkpoint time {}",
            chk.t
        )));
    }
    spec.stepper.validate()?;
    run_spec(&spec)
}

/// One line of [`report`].
#[derive(Clone, Debug)]
pub struct RunSummaryRow {
    pub name: String,
    pub records: usize,
    pub t_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_non_increasing: bool,
    pub peak_omega_inf: Option<f64>,
    pub max_residual: Option<f64>,
}

fn summarize(name: String, path: &Path) -> Result<RunSummaryRow> {
    let ts = read_timeseries(path)?;
    let col = |c: &str| -> Vec<f64> { ts.column(c).unwrap_or_default().into_iter().flatten().collect() };
    let t = col("t");
    let e = col("energy");
    let omega = col("omega_inf");
    let res: Vec<f64> = ["r1", "r2", "r3"].iter().flat_map(|c| col(c)).collect();
    let max = |v: &[f64]| (!v.is_empty()).then(|| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(RunSummaryRow {
        name,
        records: ts.rows.len(),
        t_final: t.last().copied().unwrap_or(f64::NAN),
        energy_initial: e.first().copied().unwrap_or(f64::NAN),
        energy_final: e.last().copied().unwrap_or(f64::NAN),
        energy_non_increasing: e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-8) + 1e-14),
        peak_omega_inf: max(&omega),
        max_residual: max(&res),
    })
}

/// Summaries of `dir/timeseries.csv` and of every `dir/*/timeseries.csv`.
pub fn report(dir: &Path) -> Result<Vec<RunSummaryRow>> {
    let mut rows = Vec::new();
    let own = dir.join(TIMESERIES_FILE);
    if own.is_file() {
        rows.push(summarize(".".into(), &own)?);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(TIMESERIES_FILE).is_file())
        .collect();
    subdirs.sort();
    for sub in subdirs {
        let name = sub.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        rows.push(summarize(name, &sub.join(TIMESERIES_FILE))?);
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("no {TIMESERIES_FILE} under {}", dir.display())));
    }
    Ok(rows)
}

pub fn format_report(rows: &[RunSummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>7} {:>10} {:>14} {:>14} {:>9} {:>14} {:>11}",
        "run", "records", "t_final", "E_initial", "E_final", "E_mono", "peak_omega_inf", "max_resid"
    );
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4e}"));
    for r in rows {
        let _ = writeln!(
            s,
            "{:<12} {:>7} {:>10.4} {:>14.8e} {:>14.8e} {:>9} {:>14} {:>11}",
            r.name,
            r.records,
            r.t_final,
            r.energy_initial,
            r.energy_final,
            r.energy_non_increasing,
            opt(r.peak_omega_inf),
            opt(r.max_residual)
        );
    }
    s
}
