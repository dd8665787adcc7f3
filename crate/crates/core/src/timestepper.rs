//! Integrating-factor Runge–Kutta time stepping.
//!
//! Each prognostic mode satisfies `∂ₜŵ = -m(k)ŵ + N̂(w)`. The dissipative
//! part is absorbed exactly through `e^{-m(k)t}` and the nonlinear part is
//! advanced with classical RK4 (or Heun's RK2) in the transformed variable.

use std::fmt;
use std::time::Instant;

use crate::diagnostics::{linf_norm, DiagnosticSink};
use crate::dynamics::{Dissipation, RhsEvaluator, SimState, SystemConfig};
use crate::error::{Error, Result};
use crate::fields::SpectralVector;
use crate::spectral::{eval_symbol, MultiplierTable, SymbolSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    IfRk4,
    IfRk2,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::IfRk4 => "if-rk4",
            Scheme::IfRk2 => "if-rk2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "if-rk4" | "ifrk4" | "rk4" => Some(Scheme::IfRk4),
            "if-rk2" | "ifrk2" | "rk2" => Some(Scheme::IfRk2),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Added to the advective speed in the CFL bound so a quiescent state still
/// has a finite step limit.
pub const SPEED_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub cfl_target: f64,
    pub t_end: f64,
    /// Recompute `dt` from the CFL bound every [`ADAPT_INTERVAL`] steps,
    /// never exceeding the configured `dt`.
    pub adaptive: bool,
    /// Halt when `‖ω‖_∞` exceeds this value.
    pub blowup_ceiling: f64,
    /// Emit a diagnostics snapshot every this many steps (the final state is
    /// always emitted).
    pub diagnostics_every: u64,
    /// Drop the nonlinear terms; the step reduces to the exact semigroup.
    pub linear_only: bool,
}

pub const ADAPT_INTERVAL: u64 = 10;

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::IfRk4,
            dt,
            cfl_target: 0.5,
            t_end,
            adaptive: false,
            blowup_ceiling: 1e8,
            diagnostics_every: 10,
            linear_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("stepper.dt = {} must be positive", self.dt)));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target < 1.0) {
            return Err(Error::Config(format!(
                "stepper.cfl_target = {} must lie in (0, 1)",
                self.cfl_target
            )));
        }
        if !self.t_end.is_finite() {
            return Err(Error::Config("stepper.t_end must be finite".into()));
        }
        if !(self.blowup_ceiling > 0.0) {
            return Err(Error::Config("stepper.blowup_ceiling must be positive".into()));
        }
        if self.diagnostics_every == 0 {
            return Err(Error::Config("diagnostics_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Largest stable step `cfl·dx / (max|u| + |b| + floor)`.
pub fn cfl_limit(state: &SimState, cfl_target: f64) -> Result<f64> {
    let grid = state.grid();
    let [u1, u2] = state.u().components();
    let [b1, b2] = state.b().components();
    let r = grid.backward_many(&[u1, u2, b1, b2])?;
    let speed = (0..grid.len())
        .map(|p| r[0][p].hypot(r[1][p]) + r[2][p].hypot(r[3][p]))
        .fold(0.0, f64::max);
    Ok(cfl_target * grid.spacing() / (speed + SPEED_FLOOR))
}

pub struct StepResult {
    pub state: SimState,
    /// Quadrature of `∫ D dt` over the step, consistent with the scheme,
    /// where `D = Σ m_v Re(conj(û) v̂) + Σ m_b |b̂|²`.
    pub dissipated: f64,
}

struct Factors {
    dt: f64,
    v_full: Vec<f64>,
    v_half: Vec<f64>,
    b_full: Vec<f64>,
    b_half: Vec<f64>,
}

/// Reusable per-system stepping tables.
pub struct Integrator {
    rhs: RhsEvaluator,
    scheme: Scheme,
    linear_only: bool,
    filter: SymbolSpec,
    inverse_filter: MultiplierTable,
    factors: Option<Factors>,
}

#[derive(Clone)]
struct Pair {
    v: SpectralVector,
    b: SpectralVector,
}

impl Pair {
    fn of(s: &SimState) -> Self {
        Self {
            v: s.v().clone(),
            b: s.b().clone(),
        }
    }

    fn axpy(&mut self, a: f64, x: &Pair) -> Result<()> {
        self.v.axpy(a, &x.v)?;
        self.b.axpy(a, &x.b)
    }

    fn scale_modes(&mut self, fv: &[f64], fb: &[f64]) {
        scale_vector(&mut self.v, fv);
        scale_vector(&mut self.b, fb);
    }
}

fn scale_vector(f: &mut SpectralVector, factors: &[f64]) {
    for c in f.components_mut() {
        for (z, &e) in c.coeffs_mut().iter_mut().zip(factors) {
            *z *= e;
        }
    }
}

impl Integrator {
    pub fn new(config: &SystemConfig, grid: &std::sync::Arc<crate::Grid>, scheme: Scheme) -> Result<Self> {
        Ok(Self {
            rhs: RhsEvaluator::new(config, grid)?,
            scheme,
            linear_only: false,
            filter: config.filter_symbol(),
            inverse_filter: eval_symbol(&config.inverse_filter_symbol(), grid)?,
            factors: None,
        })
    }

    pub fn linear_only(mut self, on: bool) -> Self {
        self.linear_only = on;
        self
    }

    pub fn config(&self) -> &SystemConfig {
        self.rhs.config()
    }

    fn state(&self, p: Pair, t: f64) -> Result<SimState> {
        SimState::with_table(p.v, p.b, t, self.filter.clone(), &self.inverse_filter)
    }

    fn nonlinear(&self, s: &SimState) -> Result<Pair> {
        if self.linear_only {
            return Ok(Pair {
                v: SpectralVector::zeros(s.grid()),
                b: SpectralVector::zeros(s.grid()),
            });
        }
        let (v, b) = self.rhs.both(s, Dissipation::Omitted)?;
        Ok(Pair { v, b })
    }

    /// Instantaneous dissipation rate `D` of a state.
    pub fn dissipation_rate(&self, s: &SimState) -> Result<f64> {
        let mv = self.rhs.velocity_dissipation();
        let mb = self.rhs.magnetic_dissipation();
        let mut d = 0.0;
        for i in 0..2 {
            d += mv.weighted_inner(&s.u().components()[i], &s.v().components()[i])?;
            d += mb.weighted_inner(&s.b().components()[i], &s.b().components()[i])?;
        }
        Ok(d)
    }

    fn factors(&mut self, dt: f64) -> &Factors {
        if self.factors.as_ref().is_none_or(|f| f.dt != dt) {
            let mv = self.rhs.velocity_dissipation();
            let mb = self.rhs.magnetic_dissipation();
            self.factors = Some(Factors {
                dt,
                v_full: mv.decay_factors(dt),
                v_half: mv.decay_factors(dt / 2.0),
                b_full: mb.decay_factors(dt),
                b_half: mb.decay_factors(dt / 2.0),
            });
        }
        self.factors.as_ref().expect("just set")
    }

    /// Advances by `dt` (which may be negative). The caller's state must
    /// have been built for this integrator's system.
    pub fn advance(&mut self, s0: &SimState, dt: f64) -> Result<StepResult> {
        s0.check_cache(self.config())?;
        let t0 = s0.t();
        let f = self.factors(dt);
        let (ev, eh, bv, bh) = (f.v_full.clone(), f.v_half.clone(), f.b_full.clone(), f.b_half.clone());
        let p0 = Pair::of(s0);
        let d0 = self.dissipation_rate(s0)?;
        let k1 = self.nonlinear(s0)?;

        let (mut p1, dissipated) = match self.scheme {
            Scheme::IfRk4 => {
                // a = Eh(s0 + dt/2·k1)
                let mut a = p0.clone();
                a.axpy(dt / 2.0, &k1)?;
                a.scale_modes(&eh, &bh);
                let sa = self.state(a, t0 + dt / 2.0)?;
                let k2 = self.nonlinear(&sa)?;
                // b = Eh·s0 + dt/2·k2
                let mut b = p0.clone();
                b.scale_modes(&eh, &bh);
                b.axpy(dt / 2.0, &k2)?;
                let sb = self.state(b, t0 + dt / 2.0)?;
                let k3 = self.nonlinear(&sb)?;
                // c = E·s0 + dt·Eh·k3
                let mut c = p0.clone();
                c.scale_modes(&ev, &bv);
                let mut k3h = k3.clone();
                k3h.scale_modes(&eh, &bh);
                c.axpy(dt, &k3h)?;
                let sc = self.state(c, t0 + dt)?;
                let k4 = self.nonlinear(&sc)?;
                // s1 = E·s0 + dt/6·(E·k1 + 2·Eh·(k2 + k3) + k4)
                let mut mid = k2;
                mid.axpy(1.0, &k3)?;
                mid.scale_modes(&eh, &bh);
                let mut first = k1;
                first.scale_modes(&ev, &bv);
                let mut out = p0;
                out.scale_modes(&ev, &bv);
                out.axpy(dt / 6.0, &first)?;
                out.axpy(dt / 3.0, &mid)?;
                out.axpy(dt / 6.0, &k4)?;
                let q = dt / 6.0
                    * (d0
                        + 2.0 * self.dissipation_rate(&sa)?
                        + 2.0 * self.dissipation_rate(&sb)?
                        + self.dissipation_rate(&sc)?);
                (out, q)
            }
            Scheme::IfRk2 => {
                // a = E(s0 + dt·k1); s1 = E·s0 + dt/2·(E·k1 + k2)
                let mut a = p0.clone();
                a.axpy(dt, &k1)?;
                a.scale_modes(&ev, &bv);
                let sa = self.state(a, t0 + dt)?;
                let k2 = self.nonlinear(&sa)?;
                let mut first = k1;
                first.scale_modes(&ev, &bv);
                let mut out = p0;
                out.scale_modes(&ev, &bv);
                out.axpy(dt / 2.0, &first)?;
                out.axpy(dt / 2.0, &k2)?;
                let q = dt / 2.0 * (d0 + self.dissipation_rate(&sa)?);
                (out, q)
            }
        };
        if !self.linear_only {
            for f in [&mut p1.v, &mut p1.b] {
                f.enforce_hermitian();
                f.dealias_in_place();
            }
        }
        let state = self.state(p1, t0 + dt)?;
        if !(state.v().is_finite() && state.b().is_finite()) {
            return Err(Error::BlowUp {
                t: t0 + dt,
                reason: "non-finite coefficient".into(),
            });
        }
        Ok(StepResult {
            state,
            dissipated,
        })
    }
}

/// One step of size `sc.dt`, after checking the CFL bound.
pub fn step(state: &SimState, config: &SystemConfig, sc: &StepperConfig) -> Result<SimState> {
    sc.validate()?;
    check_cfl(state, sc)?;
    let mut integ = Integrator::new(config, state.grid(), sc.scheme)?.linear_only(sc.linear_only);
    Ok(integ.advance(state, sc.dt)?.state)
}

fn check_cfl(state: &SimState, sc: &StepperConfig) -> Result<()> {
    if sc.linear_only {
        return Ok(());
    }
    let limit = cfl_limit(state, sc.cfl_target)?;
    if sc.dt > limit {
        return Err(Error::Precondition(format!(
            "dt = {} exceeds the CFL limit {limit:.6e} (cfl_target = {})",
            sc.dt, sc.cfl_target
        )));
    }
    Ok(())
}

/// What a sink sees at each emission.
pub struct Snapshot<'a> {
    pub state: &'a SimState,
    pub step: u64,
    /// Accumulated `∫ D dt` since the start of the run.
    pub dissipated: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowUp {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub final_state: SimState,
    pub final_time: f64,
    pub steps: u64,
    pub wall_seconds: f64,
    pub blowup: Option<BlowUp>,
    pub peak_omega_linf: f64,
    /// Peak value of every monitored quantity, as reported by the sink.
    pub peaks: Vec<(String, f64)>,
    pub covered_regime: bool,
    /// Accumulated `∫ D dt` over the run.
    pub dissipated: f64,
}

/// Steps from `initial.t()` to `sc.t_end`, emitting snapshots to `sink`.
///
/// A blow-up (non-finite coefficients or `‖ω‖_∞` above the ceiling) halts
/// the run and is reported in [`RunReport::blowup`]; the report then holds
/// the last finite state.
pub fn run(
    initial: &SimState,
    config: &SystemConfig,
    sc: &StepperConfig,
    sink: &mut dyn DiagnosticSink,
) -> Result<RunReport> {
    run_from(initial, config, sc, sink, 0, 0.0)
}

/// [`run`] continuing a step counter and dissipation integral, for resumes.
pub fn run_from(
    initial: &SimState,
    config: &SystemConfig,
    sc: &StepperConfig,
    sink: &mut dyn DiagnosticSink,
    first_step: u64,
    dissipated0: f64,
) -> Result<RunReport> {
    sc.validate()?;
    initial.check_cache(config)?;
    let t0 = initial.t();
    if sc.t_end < t0 {
        return Err(Error::Precondition(format!(
            "t_end = {} precedes the initial time {t0}",
            sc.t_end
        )));
    }
    let started = Instant::now();
    let mut dt = sc.dt;
    if sc.adaptive {
        dt = dt.min(cfl_limit(initial, sc.cfl_target)?);
    } else {
        check_cfl(initial, sc)?;
    }
    let mut integ = Integrator::new(config, initial.grid(), sc.scheme)?.linear_only(sc.linear_only);

    let mut state = initial.clone();
    let mut step = first_step;
    let mut dissipated = dissipated0;
    let mut peak_omega = linf_norm(&state.omega().0)?;
    let mut blowup = None;
    sink.observe(&Snapshot {
        state: &state,
        step,
        dissipated,
        dt,
    })?;
    let mut last_emitted = step;

    // relative slack so round-off in t does not produce a sliver step
    let eps = 1e-12 * sc.t_end.abs().max(1.0);
    // t = seg_t0 + seg_steps·dt instead of a running sum, which drifts
    let mut seg_t0 = t0;
    let mut seg_steps = 0u64;
    while sc.t_end - state.t() > eps {
        if sc.adaptive && step > first_step && (step - first_step).is_multiple_of(ADAPT_INTERVAL) {
            let next = sc.dt.min(cfl_limit(&state, sc.cfl_target)?);
            if next != dt {
                dt = next;
                seg_t0 = state.t();
                seg_steps = 0;
            }
        }
        let remaining = sc.t_end - state.t();
        let this_dt = if remaining < dt * (1.0 + 1e-9) { remaining } else { dt };
        let out = match integ.advance(&state, this_dt) {
            Ok(out) => out,
            Err(Error::BlowUp { t, reason }) => {
                blowup = Some(BlowUp { t, reason });
                break;
            }
            Err(e) => return Err(e),
        };
        let omega_max = linf_norm(&out.state.omega().0)?;
        if !omega_max.is_finite() || omega_max > sc.blowup_ceiling {
            blowup = Some(BlowUp {
                t: out.state.t(),
                reason: format!("‖ω‖_∞ = {omega_max:.6e} exceeds the ceiling {:.3e}", sc.blowup_ceiling),
            });
            break;
        }
        peak_omega = peak_omega.max(omega_max);
        step += 1;
        dissipated += out.dissipated;
        seg_steps += 1;
        let t_next = seg_t0 + seg_steps as f64 * dt;
        // land exactly on t_end
        state = if this_dt != dt || sc.t_end - t_next <= eps {
            out.state.with_time(sc.t_end)
        } else {
            out.state.with_time(t_next)
        };
        if (step - first_step).is_multiple_of(sc.diagnostics_every) {
            sink.observe(&Snapshot {
                state: &state,
                step,
                dissipated,
                dt: this_dt,
            })?;
            last_emitted = step;
        }
    }
    if last_emitted != step {
        sink.observe(&Snapshot {
            state: &state,
            step,
            dissipated,
            dt,
        })?;
    }
    if let Some(b) = &blowup {
        log::warn!("blow-up at t = {}: {}", b.t, b.reason);
    }
    Ok(RunReport {
        final_time: state.t(),
        final_state: state,
        steps: step - first_step,
        wall_seconds: started.elapsed().as_secs_f64(),
        blowup,
        peak_omega_linf: peak_omega,
        peaks: sink.peaks(),
        covered_regime: config.covered_regime(),
        dissipated,
    })
}
