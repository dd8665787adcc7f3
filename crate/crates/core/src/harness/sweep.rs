use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::dynamics::SystemVariant;
use crate::error::{Error, Result};
use crate::timestepper::BlowUp;

use super::{config::RunSpec, run_spec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisParam {
    Alpha,
    Beta,
    Gamma,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Alpha => "alpha",
            AxisParam::Beta => "beta",
            AxisParam::Gamma => "gamma",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: AxisParam,
    pub values: Vec<f64>,
}

/// Parses `beta=0.6:1.0:0.1` (inclusive range) or `beta=0.6,0.8,1.0`.
pub fn parse_axis(text: &str) -> Result<Axis> {
    let (name, spec) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("axis {text:?} must look like beta=0.6:1.0:0.1")))?;
    let param = match name.trim() {
        "alpha" => AxisParam::Alpha,
        "beta" => AxisParam::Beta,
        "gamma" => AxisParam::Gamma,
        other => return Err(Error::Config(format!("unknown axis parameter {other:?}"))),
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("axis {text:?}: {s:?}: {e}")))
    };
    let spec = spec.trim();
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(Error::Config(format!("axis {text:?}: range needs start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || stop < start {
            return Err(Error::Config(format!("axis {text:?}: need step > 0 and stop ≥ start")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // round to the step's decimal grid so 0.6 + 3·0.1 prints as 0.9
        (0..count)
            .map(|i| {
                let x = start + i as f64 * step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(Error::Config(format!("axis {text:?} has no values")));
    }
    Ok(Axis { param, values })
}

#[derive(Clone, Debug)]
pub struct CellSummary {
    pub completed: bool,
    pub blowup: Option<BlowUp>,
    pub final_time: f64,
    pub steps: u64,
    pub peak_omega_linf: f64,
    pub peaks: Vec<(String, f64)>,
}

#[derive(Clone, Debug)]
pub struct CellReport {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub covered: bool,
    /// Errors are recorded per cell; the sweep continues.
    pub outcome: std::result::Result<CellSummary, String>,
}

fn cell_spec(base: &RunSpec, axes: &[Axis], point: &[f64], index: usize) -> Result<RunSpec> {
    let sys = &base.system;
    let (mut a, mut b, mut c) = (sys.alpha(), sys.beta(), sys.gamma());
    let mut gamma_set = false;
    for (axis, &x) in axes.iter().zip(point) {
        match axis.param {
            AxisParam::Alpha => a = x,
            AxisParam::Beta => b = x,
            AxisParam::Gamma => {
                c = x;
                gamma_set = true;
            }
        }
    }
    // along the THM2 line γ follows α
    if sys.variant() == SystemVariant::Thm2 && !gamma_set {
        c = 2.0 - a;
    }
    let mut spec = base.clone();
    spec.system = sys.with_exponents(a, b, c)?;
    spec.output_dir = base.output_dir.as_ref().map(|d| d.join(format!("cell_{index:03}")));
    Ok(spec)
}

/// Runs every point of the Cartesian product of `axes` in parallel. Each
/// cell writes into its own `cell_###` directory under the base output
/// directory.
pub fn sweep(base: &RunSpec, axes: &[Axis]) -> Result<Vec<CellReport>> {
    if axes.is_empty() {
        return Err(Error::Config("a sweep needs at least one axis".into()));
    }
    if let Some(axis) = axes.iter().find(|a| a.values.is_empty()) {
        return Err(Error::Config(format!("axis {} has no values", axis.param.name())));
    }
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    let cells = points
        .par_iter()
        .enumerate()
        .map(|(index, point)| {
            let fallback = |param: AxisParam, default: f64| {
                axes.iter()
                    .position(|a| a.param == param)
                    .map_or(default, |i| point[i])
            };
            match cell_spec(base, axes, point, index) {
                Err(e) => CellReport {
                    index,
                    alpha: fallback(AxisParam::Alpha, base.system.alpha()),
                    beta: fallback(AxisParam::Beta, base.system.beta()),
                    gamma: fallback(AxisParam::Gamma, base.system.gamma()),
                    covered: false,
                    outcome: Err(e.to_string()),
                },
                Ok(spec) => {
                    let sys = spec.system.clone();
                    let outcome = run_spec(&spec)
                        .map(|o| CellSummary {
                            completed: o.report.blowup.is_none(),
                            blowup: o.report.blowup.clone(),
                            final_time: o.report.final_time,
                            steps: o.report.steps,
                            peak_omega_linf: o.report.peak_omega_linf,
                            peaks: o.report.peaks.clone(),
                        })
                        .map_err(|e| e.to_string());
                    CellReport {
                        index,
                        alpha: sys.alpha(),
                        beta: sys.beta(),
                        gamma: sys.gamma(),
                        covered: sys.covered_regime(),
                        outcome,
                    }
                }
            }
        })
        .collect();
    Ok(cells)
}

/// Fixed-width summary table.
pub fn format_sweep_table(cells: &[CellReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4} {:>7} {:>7} {:>7} {:>7} {:>9} {:>10} {:>14}  note",
        "cell", "alpha", "beta", "gamma", "covered", "complete", "t_final", "peak_omega_inf"
    );
    for c in cells {
        let (complete, t, peak, note) = match &c.outcome {
            Ok(o) => (
                o.completed.to_string(),
                format!("{:.4}", o.final_time),
                format!("{:.6e}", o.peak_omega_linf),
                o.blowup.as_ref().map(|b| format!("blow-up at t={}: {}", b.t, b.reason)).unwrap_or_default(),
            ),
            Err(e) => ("error".into(), "-".into(), "-".into(), e.clone()),
        };
        let _ = writeln!(
            s,
            "{:>4} {:>7.4} {:>7.4} {:>7.4} {:>7} {:>9} {:>10} {:>14}  {}",
            c.index, c.alpha, c.beta, c.gamma, c.covered, complete, t, peak, note
        );
    }
    s
}

/// CSV with one row per cell and the peak of every monitored quantity.
pub fn write_sweep_table(cells: &[CellReport], path: &Path) -> Result<()> {
    let labels: Vec<String> = cells
        .iter()
        .find_map(|c| c.outcome.as_ref().ok())
        .map(|o| o.peaks.iter().map(|(l, _)| format!("peak_{l}")).collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = ["cell", "alpha", "beta", "gamma", "covered", "completed", "final_time", "steps", "peak_omega_inf"]
        .map(String::from)
        .to_vec();
    header.extend(labels.iter().cloned());
    header.push("error".into());
    w.write_record(&header)?;
    let f = super::io::fmt_f64;
    for c in cells {
        let mut row = vec![c.index.to_string(), f(c.alpha), f(c.beta), f(c.gamma), c.covered.to_string()];
        match &c.outcome {
            Ok(o) => {
                row.extend([o.completed.to_string(), f(o.final_time), o.steps.to_string(), f(o.peak_omega_linf)]);
                for (i, _) in labels.iter().enumerate() {
                    row.push(o.peaks.get(i).map(|p| f(p.1)).unwrap_or_default());
                }
                row.push(String::new());
            }
            Err(e) => {
                row.extend(["false".into(), String::new(), String::new(), String::new()]);
                row.extend(labels.iter().map(|_| String::new()));
                row.push(e.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
