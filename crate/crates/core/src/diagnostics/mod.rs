//! Energies, norms, cancellation residuals, Littlewood–Paley tools and the
//! growth-condition quadrature, plus the per-snapshot record assembled
//! during runs.

pub mod bounds;
pub mod cancellation;
pub mod energy;
pub mod growth;
pub mod littlewood_paley;
pub mod norms;

use std::fmt;

pub use bounds::{multiplier_bound_check, MultiplierBoundReport};
pub use cancellation::{cancellation_residuals, cancellation_residuals_raw, CancellationResiduals};
pub use energy::{dissipation_rate, energy, energy_balance_residual, energy_parts, EnergyParts};
pub use growth::{
    growth_condition_report, growth_condition_report_fn, partial_integral, partial_integral_fn,
    GrowthReport, GrowthTrend,
};
pub use littlewood_paley::{
    besov_norm, bernstein_check, lp_decompose, lp_reconstruct, lp_spectrum, BernsteinReport,
    DyadicBlock,
};
pub use norms::{
    grad_linf, h_functional, linf_norm, linf_norm_oversampled, lp_norm, sobolev_norm,
    v_functional, FieldComponents,
};

use crate::dynamics::{SimState, SystemConfig, SystemVariant};
use crate::error::{Error, Result};
use crate::timestepper::Snapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldSel {
    U,
    V,
    B,
    Omega,
}

impl FieldSel {
    pub fn name(self) -> &'static str {
        match self {
            FieldSel::U => "u",
            FieldSel::V => "v",
            FieldSel::B => "b",
            FieldSel::Omega => "omega",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinfTarget {
    B,
    Omega,
    GradB,
    GradU,
}

impl LinfTarget {
    pub const ALL: [LinfTarget; 4] = [LinfTarget::B, LinfTarget::Omega, LinfTarget::GradB, LinfTarget::GradU];

    pub fn name(self) -> &'static str {
        match self {
            LinfTarget::B => "b_inf",
            LinfTarget::Omega => "omega_inf",
            LinfTarget::GradB => "grad_b_inf",
            LinfTarget::GradU => "grad_u_inf",
        }
    }
}

/// A monitored norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Monitor {
    Sobolev { field: FieldSel, s: f64 },
    Linf(LinfTarget),
}

impl Monitor {
    pub fn label(&self) -> String {
        match self {
            Monitor::Sobolev { field, s } => format!("{}_H{}", field.name(), s),
            Monitor::Linf(t) => t.name().to_string(),
        }
    }

    pub fn eval(&self, state: &SimState, oversample: bool) -> Result<f64> {
        let linf = |f: &dyn Fn() -> Result<f64>, g: &dyn Fn() -> Result<f64>| {
            if oversample {
                g()
            } else {
                f()
            }
        };
        match *self {
            Monitor::Sobolev { field, s } => match field {
                FieldSel::U => sobolev_norm(state.u(), s),
                FieldSel::V => sobolev_norm(state.v(), s),
                FieldSel::B => sobolev_norm(state.b(), s),
                FieldSel::Omega => sobolev_norm(state.omega(), s),
            },
            Monitor::Linf(LinfTarget::B) => linf(&|| linf_norm(state.b()), &|| linf_norm_oversampled(state.b(), 2)),
            Monitor::Linf(LinfTarget::Omega) => {
                linf(&|| linf_norm(state.omega()), &|| linf_norm_oversampled(state.omega(), 2))
            }
            Monitor::Linf(LinfTarget::GradB) => grad_linf(state.b()),
            Monitor::Linf(LinfTarget::GradU) => grad_linf(state.u()),
        }
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Sobolev exponents tracked by default: the norms the regularity arguments
/// bound for each variant, clamped to the supported range.
pub fn default_sobolev_exponents(config: &SystemConfig) -> Vec<f64> {
    let (b, c) = (config.beta(), config.gamma());
    let raw = match config.variant() {
        SystemVariant::General | SystemVariant::Thm1 => vec![b + c - 1.0, 1.0, 2.0 * c + b],
        SystemVariant::Thm2 | SystemVariant::Thm3 => vec![1.1, 2.1],
        SystemVariant::AppendixA => vec![b, 1.0 + b],
    };
    let mut out: Vec<f64> = Vec::new();
    for s in raw {
        let s = s.clamp(norms::SOBOLEV_MIN, norms::SOBOLEV_MAX);
        if !out.iter().any(|&x| (x - s).abs() < 1e-12) {
            out.push(s);
        }
    }
    out
}

/// Each exponent on `b` and on `ω`, followed by the four sup norms.
pub fn monitors_for(exponents: &[f64]) -> Vec<Monitor> {
    let mut out = Vec::with_capacity(2 * exponents.len() + 4);
    for &s in exponents {
        out.push(Monitor::Sobolev { field: FieldSel::B, s });
        out.push(Monitor::Sobolev { field: FieldSel::Omega, s });
    }
    out.extend(LinfTarget::ALL.map(Monitor::Linf));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    pub energy_total: f64,
    pub energy_parts: EnergyParts,
    /// Instantaneous dissipation rate.
    pub dissipation: f64,
    /// Accumulated `∫ D dt` since the start of the run.
    pub dissipated: f64,
    /// `(label, value)` in monitor order.
    pub monitors: Vec<(String, f64)>,
    pub v_functional: Option<f64>,
    pub h_functional: Option<f64>,
    pub residuals: Option<CancellationResiduals>,
    /// Block `L²` norms of `ω`, from `j = -1`.
    pub lp_spectrum: Vec<f64>,
    pub omega_linf: f64,
}

impl DiagnosticsRecord {
    pub fn monitor(&self, label: &str) -> Option<f64> {
        self.monitors.iter().find(|(l, _)| l == label).map(|&(_, v)| v)
    }

    pub fn is_finite(&self) -> bool {
        self.energy_total.is_finite()
            && self.dissipation.is_finite()
            && self.omega_linf.is_finite()
            && self.monitors.iter().all(|(_, v)| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    pub residuals: bool,
    pub lp_spectrum: bool,
    pub oversample_linf: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            residuals: true,
            lp_spectrum: false,
            oversample_linf: false,
        }
    }
}

/// Computes [`DiagnosticsRecord`]s for one system.
#[derive(Clone, Debug)]
pub struct DiagnosticsEngine {
    config: SystemConfig,
    monitors: Vec<Monitor>,
    options: EngineOptions,
}

impl DiagnosticsEngine {
    pub fn new(config: &SystemConfig, monitors: Vec<Monitor>, options: EngineOptions) -> Self {
        Self {
            config: config.clone(),
            monitors,
            options,
        }
    }

    /// Engine with the variant's default monitors.
    pub fn with_defaults(config: &SystemConfig) -> Self {
        Self::new(
            config,
            monitors_for(&default_sobolev_exponents(config)),
            EngineOptions::default(),
        )
    }

    pub fn monitors(&self) -> &[Monitor] {
        &self.monitors
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn record(&self, state: &SimState, step: u64, dissipated: f64) -> Result<DiagnosticsRecord> {
        let config = &self.config;
        let parts = energy_parts(state, config)?;
        let monitors = self
            .monitors
            .iter()
            .map(|m| Ok((m.label(), m.eval(state, self.options.oversample_linf)?)))
            .collect::<Result<Vec<_>>>()?;
        let variant = config.variant();
        let log_variant = matches!(variant, SystemVariant::Thm2 | SystemVariant::Thm3);
        Ok(DiagnosticsRecord {
            t: state.t(),
            step,
            energy_total: energy(state, config)?,
            energy_parts: parts,
            dissipation: dissipation_rate(state, config)?,
            dissipated,
            monitors,
            v_functional: if log_variant { Some(v_functional(state, config)?) } else { None },
            h_functional: if variant == SystemVariant::Thm2 {
                Some(h_functional(state, config)?)
            } else {
                None
            },
            residuals: if self.options.residuals {
                Some(cancellation_residuals(state)?)
            } else {
                None
            },
            lp_spectrum: if self.options.lp_spectrum {
                lp_spectrum(&state.omega().0)?
            } else {
                Vec::new()
            },
            omega_linf: linf_norm(state.omega())?,
        })
    }
}

/// Receives snapshots during a run.
pub trait DiagnosticSink {
    fn observe(&mut self, snapshot: &Snapshot<'_>) -> Result<()>;

    /// Peak value of every monitored quantity seen so far.
    fn peaks(&self) -> Vec<(String, f64)> {
        Vec::new()
    }
}

/// Discards every snapshot.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullSink;

impl DiagnosticSink for NullSink {
    fn observe(&mut self, _: &Snapshot<'_>) -> Result<()> {
        Ok(())
    }
}

/// Keeps every record and tracks monitor peaks. With a residual tolerance
/// set, a cancellation residual above it aborts the run.
#[derive(Clone, Debug)]
pub struct RecordingSink {
    engine: DiagnosticsEngine,
    records: Vec<DiagnosticsRecord>,
    peaks: Vec<(String, f64)>,
    residual_tolerance: Option<f64>,
}

impl RecordingSink {
    pub fn new(engine: DiagnosticsEngine) -> Self {
        let peaks = engine
            .monitors
            .iter()
            .map(|m| (m.label(), f64::NEG_INFINITY))
            .collect();
        Self {
            engine,
            records: Vec::new(),
            peaks,
            residual_tolerance: None,
        }
    }

    pub fn with_residual_tolerance(mut self, tol: f64) -> Self {
        self.residual_tolerance = Some(tol);
        self
    }

    pub fn engine(&self) -> &DiagnosticsEngine {
        &self.engine
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }
}

impl DiagnosticSink for RecordingSink {
    fn observe(&mut self, snap: &Snapshot<'_>) -> Result<()> {
        let rec = self.engine.record(snap.state, snap.step, snap.dissipated)?;
        if let (Some(tol), Some(r)) = (self.residual_tolerance, rec.residuals) {
            if r.max() > tol {
                return Err(Error::Consistency(format!(
                    "cancellation residuals {:?} exceed {tol:e} at t = {}",
                    r.as_array(),
                    rec.t
                )));
            }
        }
        for ((_, peak), (_, v)) in self.peaks.iter_mut().zip(&rec.monitors) {
            *peak = peak.max(*v);
        }
        self.records.push(rec);
        Ok(())
    }

    fn peaks(&self) -> Vec<(String, f64)> {
        self.peaks.clone()
    }
}
