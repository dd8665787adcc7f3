//! System variants, the simulation state and right-hand-side assembly in
//! primitive `(v, b)` form and in vorticity form.
//!
//! All quadratic products are formed pointwise on the grid, transformed back
//! and truncated with the two-thirds mask, so every nonlinear term is the
//! exact Galerkin projection of the corresponding product.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{self, SpectralVector, Vorticity};
use crate::spectral::{
    eval_symbol, dealias_in_place, GrowthForm, Grid, LogSymbol, MultiplierTable,
    SpectralScalar, SymbolSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemVariant {
    /// Full system with parameters `α, β, γ` and no logarithmic operator.
    General,
    /// `α = 0`: no velocity dissipation.
    Thm1,
    /// `β = 0`, velocity dissipation `(-Δ)^α L²`, filter `v = u + (-Δ)^γ L² u`.
    Thm2,
    /// `α = β = 0`, filter `v = u + Δ² L² u`.
    Thm3,
    /// Filter `v = u - Δu`, no `Σⱼ vⱼ∇uⱼ` term, `α = 0`.
    AppendixA,
}

impl SystemVariant {
    pub const ALL: [SystemVariant; 5] = [
        SystemVariant::General,
        SystemVariant::Thm1,
        SystemVariant::Thm2,
        SystemVariant::Thm3,
        SystemVariant::AppendixA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemVariant::General => "general",
            SystemVariant::Thm1 => "thm1",
            SystemVariant::Thm2 => "thm2",
            SystemVariant::Thm3 => "thm3",
            SystemVariant::AppendixA => "appendix_a",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn tag(self) -> u32 {
        match self {
            SystemVariant::General => 0,
            SystemVariant::Thm1 => 1,
            SystemVariant::Thm2 => 2,
            SystemVariant::Thm3 => 3,
            SystemVariant::AppendixA => 4,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.tag() == tag)
    }

    pub fn uses_log_operator(self) -> bool {
        matches!(self, SystemVariant::Thm2 | SystemVariant::Thm3)
    }

    /// Whether the velocity equation carries the `Σⱼ vⱼ∇uⱼ` term.
    pub fn has_stretching_term(self) -> bool {
        self != SystemVariant::AppendixA
    }
}

impl fmt::Display for SystemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Velocity,
    Magnetic,
}

/// Whether the dissipative multiplier is included in a right-hand side or
/// left to the integrating factor of the time stepper.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dissipation {
    Explicit,
    Omitted,
}

const EXPONENT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    variant: SystemVariant,
    alpha: f64,
    beta: f64,
    gamma: f64,
    g: Option<LogSymbol>,
}

impl SystemConfig {
    /// Validates the structural constraints of the variant. Regularity
    /// conditions (such as `β > 1 - γ/2`) do not reject a configuration;
    /// they only decide [`SystemConfig::covered_regime`].
    pub fn new(
        variant: SystemVariant,
        alpha: f64,
        beta: f64,
        gamma: f64,
        g: Option<LogSymbol>,
    ) -> Result<Self> {
        for (name, x) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !x.is_finite() || !(0.0..=2.0).contains(&x) {
                return Err(Error::Config(format!("{name} = {x} must lie in [0, 2]")));
            }
        }
        if variant.uses_log_operator() != g.is_some() {
            return Err(Error::Config(if g.is_some() {
                format!("variant {variant} takes no logarithmic weight g")
            } else {
                format!("variant {variant} requires a logarithmic weight g")
            }));
        }
        let require = |ok: bool, condition: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "variant {variant} requires {condition} (got α={alpha}, β={beta}, γ={gamma})"
                )))
            }
        };
        match variant {
            SystemVariant::General => {}
            SystemVariant::Thm1 => require(alpha == 0.0, "α = 0")?,
            SystemVariant::Thm2 => {
                require(beta == 0.0, "β = 0")?;
                require(
                    (alpha + gamma - 2.0).abs() <= EXPONENT_TOL && alpha > 0.0,
                    "α+γ=2 with α∈(0,2]",
                )?;
            }
            SystemVariant::Thm3 => {
                require(alpha == 0.0 && beta == 0.0 && gamma == 2.0, "α=β=0 and γ=2")?
            }
            SystemVariant::AppendixA => {
                require(alpha == 0.0 && gamma == 1.0, "α = 0 and γ = 1 (v = u - Δu)")?
            }
        }
        Ok(Self {
            variant,
            alpha,
            beta,
            gamma,
            g,
        })
    }

    pub fn thm1(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(SystemVariant::Thm1, 0.0, beta, gamma, None)
    }

    pub fn thm2(alpha: f64, gamma: f64, g: LogSymbol) -> Result<Self> {
        Self::new(SystemVariant::Thm2, alpha, 0.0, gamma, Some(g))
    }

    pub fn thm3(g: LogSymbol) -> Result<Self> {
        Self::new(SystemVariant::Thm3, 0.0, 0.0, 2.0, Some(g))
    }

    pub fn appendix_a(beta: f64) -> Result<Self> {
        Self::new(SystemVariant::AppendixA, 0.0, beta, 1.0, None)
    }

    pub fn general(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(SystemVariant::General, alpha, beta, gamma, None)
    }

    pub fn variant(&self) -> SystemVariant {
        self.variant
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn g(&self) -> Option<&LogSymbol> {
        self.g.as_ref()
    }

    /// Human-readable hypothesis under which the variant is globally regular.
    pub fn regime_condition(&self) -> &'static str {
        match self.variant {
            SystemVariant::General => "α = 0 with β > 1-γ/2, or β = 0 with α+γ = 2",
            SystemVariant::Thm1 => "β > 1-γ/2 with γ∈[0,2]",
            SystemVariant::Thm2 => "α+γ=2 with α∈(0,2] and ∫ dτ/(τ√(ln τ) g²(τ)) = ∞",
            SystemVariant::Thm3 => "∫ dτ/(τ√(ln τ) g(τ)) = ∞",
            SystemVariant::AppendixA => "β > 1/2",
        }
    }

    /// Whether the parameters satisfy a global-regularity hypothesis. Every
    /// inequality is strict, so boundary cases are not covered.
    pub fn covered_regime(&self) -> bool {
        let (a, b, c) = (self.alpha, self.beta, self.gamma);
        match self.variant {
            SystemVariant::General => {
                (a == 0.0 && b > 1.0 - c / 2.0)
                    || (b == 0.0 && a > 0.0 && (a + c - 2.0).abs() <= EXPONENT_TOL)
            }
            SystemVariant::Thm1 => b > 1.0 - c / 2.0,
            SystemVariant::Thm2 => self
                .g
                .as_ref()
                .is_some_and(|g| g.satisfies_growth(GrowthForm::Squared)),
            SystemVariant::Thm3 => self
                .g
                .as_ref()
                .is_some_and(|g| g.satisfies_growth(GrowthForm::Plain)),
            SystemVariant::AppendixA => b > 0.5,
        }
    }

    /// The multiplier `1 + |k|^{2γ}/g²` taking `u` to `v`.
    pub fn filter_symbol(&self) -> SymbolSpec {
        SymbolSpec::Filter {
            gamma: self.gamma,
            g: self.g.clone(),
        }
    }

    pub fn inverse_filter_symbol(&self) -> SymbolSpec {
        SymbolSpec::InverseFilter {
            gamma: self.gamma,
            g: self.g.clone(),
        }
    }

    /// Same system with different exponents (`g` and variant kept).
    pub fn with_exponents(&self, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(self.variant, alpha, beta, gamma, self.g.clone())
    }
}

/// The dissipative multiplier of one equation.
///
/// Velocity: `|k|^{2α}` (general), `|k|^{2α}/g²` (THM2), zero otherwise.
/// Magnetic: `|k|^{2β}` (general, THM1, appendix A), zero otherwise. An
/// exponent of zero means "no dissipation", so it also yields the zero symbol.
pub fn dissipation_symbol(config: &SystemConfig, which: Equation) -> SymbolSpec {
    use SystemVariant::*;
    match (which, config.variant) {
        (Equation::Velocity, General) if config.alpha > 0.0 => SymbolSpec::FracPower(config.alpha),
        (Equation::Velocity, Thm2) => {
            let g = config.g.clone().expect("THM2 carries g");
            SymbolSpec::Composite(vec![
                SymbolSpec::FracPower(config.alpha),
                SymbolSpec::LogWeight(g.clone()),
                SymbolSpec::LogWeight(g),
            ])
        }
        (Equation::Magnetic, General | Thm1 | AppendixA) if config.beta > 0.0 => {
            SymbolSpec::FracPower(config.beta)
        }
        _ => SymbolSpec::Zero,
    }
}

/// Prognostic pair `(v, b)` at time `t` with the derived `u` and `ω`.
#[derive(Clone, Debug)]
pub struct SimState {
    v: SpectralVector,
    b: SpectralVector,
    t: f64,
    u: SpectralVector,
    omega: Vorticity,
    filter: SymbolSpec,
}

/// Relative divergence tolerated in prognostic fields.
pub const DIVERGENCE_TOL: f64 = 1e-12;

impl SimState {
    /// Builds a state and its caches. `v` and `b` must be divergence-free.
    pub fn new(v: SpectralVector, b: SpectralVector, t: f64, config: &SystemConfig) -> Result<Self> {
        v.x().check_grid(b.x())?;
        for (name, f) in [("v", &v), ("b", &b)] {
            let defect = f.divergence_defect();
            if defect > DIVERGENCE_TOL {
                return Err(Error::Precondition(format!(
                    "{name} is not divergence-free (defect {defect:.3e})"
                )));
            }
        }
        Self::with_caches(v, b, t, config)
    }

    /// Projects `v` and `b` onto divergence-free fields, then builds the state.
    pub fn projected(v: &SpectralVector, b: &SpectralVector, t: f64, config: &SystemConfig) -> Result<Self> {
        Self::with_caches(fields::leray_project(v), fields::leray_project(b), t, config)
    }

    pub fn zero(grid: &Arc<Grid>, config: &SystemConfig) -> Result<Self> {
        Self::with_caches(SpectralVector::zeros(grid), SpectralVector::zeros(grid), 0.0, config)
    }

    pub(crate) fn with_caches(
        v: SpectralVector,
        b: SpectralVector,
        t: f64,
        config: &SystemConfig,
    ) -> Result<Self> {
        let filter = config.filter_symbol();
        let inverse = eval_symbol(&config.inverse_filter_symbol(), v.grid())?;
        Self::with_table(v, b, t, filter, &inverse)
    }

    /// Builds a state from a precomputed inverse-filter table; `filter` must
    /// be the symbol the table inverts.
    pub fn with_table(
        v: SpectralVector,
        b: SpectralVector,
        t: f64,
        filter: SymbolSpec,
        inverse: &MultiplierTable,
    ) -> Result<Self> {
        let u = v.apply(inverse)?;
        let omega = fields::vorticity_of(&v);
        Ok(Self {
            v,
            b,
            t,
            u,
            omega,
            filter,
        })
    }

    pub fn v(&self) -> &SpectralVector {
        &self.v
    }

    pub fn b(&self) -> &SpectralVector {
        &self.b
    }

    pub fn u(&self) -> &SpectralVector {
        &self.u
    }

    pub fn omega(&self) -> &Vorticity {
        &self.omega
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.v.grid()
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Fails when the cached `u` was derived with a filter other than the
    /// configuration's.
    pub fn check_cache(&self, config: &SystemConfig) -> Result<()> {
        if self.filter == config.filter_symbol() {
            Ok(())
        } else {
            Err(Error::Consistency(format!(
                "state caches were built for {:?}, configuration uses {:?}",
                self.filter,
                config.filter_symbol()
            )))
        }
    }

    /// Largest coefficient difference between the caches and a fresh
    /// derivation from `v`.
    pub fn cache_deviation(&self, config: &SystemConfig) -> Result<f64> {
        let fresh = Self::with_caches(self.v.clone(), self.b.clone(), self.t, config)?;
        let diff = |a: &SpectralScalar, b: &SpectralScalar| {
            a.coeffs()
                .iter()
                .zip(b.coeffs())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        Ok(diff(self.u.x(), fresh.u.x())
            .max(diff(self.u.y(), fresh.u.y()))
            .max(diff(&self.omega.0, &fresh.omega.0)))
    }
}

/// Real-space samples of the fields and first derivatives entering the
/// nonlinear terms. `du[i][j]` holds `∂ⱼuᵢ`.
struct Physical {
    u: [Vec<f64>; 2],
    v: [Vec<f64>; 2],
    b: [Vec<f64>; 2],
    du: [[Vec<f64>; 2]; 2],
    dv: [[Vec<f64>; 2]; 2],
    db: [[Vec<f64>; 2]; 2],
}

impl Physical {
    fn of(state: &SimState) -> Result<Self> {
        let grid = state.grid();
        let mut spectral: Vec<SpectralScalar> = Vec::with_capacity(18);
        for f in [&state.u, &state.v, &state.b] {
            spectral.extend(f.components().iter().cloned());
        }
        for f in [&state.u, &state.v, &state.b] {
            for c in f.components() {
                spectral.push(fields::partial(c, 0));
                spectral.push(fields::partial(c, 1));
            }
        }
        let refs: Vec<&SpectralScalar> = spectral.iter().collect();
        let mut real = grid.backward_many(&refs)?.into_iter();
        let mut next = || real.next().expect("18 fields");
        let u = [next(), next()];
        let v = [next(), next()];
        let b = [next(), next()];
        let mut jac = || [[next(), next()], [next(), next()]];
        let du = jac();
        let dv = jac();
        let db = jac();
        Ok(Self { u, v, b, du, dv, db })
    }

    fn len(&self) -> usize {
        self.u[0].len()
    }
}

fn to_spectral_pair(grid: &Arc<Grid>, first: &[f64], second: &[f64]) -> Result<SpectralVector> {
    let (a, b) = grid.forward_pair(first, second)?;
    let mut out = SpectralVector::new(a, b)?;
    out.dealias_in_place();
    Ok(out)
}

/// Precomputed tables for repeated right-hand-side evaluation of one system.
#[derive(Clone, Debug)]
pub struct RhsEvaluator {
    config: SystemConfig,
    grid: Arc<Grid>,
    velocity_dissipation: MultiplierTable,
    magnetic_dissipation: MultiplierTable,
}

/// Drift in `∇·` of the magnetic right-hand side beyond which it is
/// re-projected.
const MAGNETIC_REPROJECT_TOL: f64 = 1e-10;

impl RhsEvaluator {
    pub fn new(config: &SystemConfig, grid: &Arc<Grid>) -> Result<Self> {
        Ok(Self {
            config: config.clone(),
            grid: grid.clone(),
            velocity_dissipation: eval_symbol(&dissipation_symbol(config, Equation::Velocity), grid)?,
            magnetic_dissipation: eval_symbol(&dissipation_symbol(config, Equation::Magnetic), grid)?,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn velocity_dissipation(&self) -> &MultiplierTable {
        &self.velocity_dissipation
    }

    pub fn magnetic_dissipation(&self) -> &MultiplierTable {
        &self.magnetic_dissipation
    }

    fn check(&self, state: &SimState) -> Result<()> {
        self.grid.same_as(state.grid())?;
        state.check_cache(&self.config)
    }

    fn velocity_from(&self, phys: &Physical, state: &SimState, diss: Dissipation) -> Result<SpectralVector> {
        let n = phys.len();
        let stretching = self.config.variant.has_stretching_term();
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for (i, out_i) in out.iter_mut().enumerate() {
            for p in 0..n {
                // -(u·∇)vᵢ
                let mut acc = -(phys.u[0][p] * phys.dv[i][0][p] + phys.u[1][p] * phys.dv[i][1][p]);
                // -Σⱼ vⱼ ∂ᵢuⱼ
                if stretching {
                    acc -= phys.v[0][p] * phys.du[0][i][p] + phys.v[1][p] * phys.du[1][i][p];
                }
                // +(b·∇)bᵢ
                acc += phys.b[0][p] * phys.db[i][0][p] + phys.b[1][p] * phys.db[i][1][p];
                out_i[p] = acc;
            }
        }
        let mut rhs = fields::leray_project(&to_spectral_pair(&self.grid, &out[0], &out[1])?);
        clear_mean(rhs.components_mut());
        if diss == Dissipation::Explicit {
            rhs.axpy(-1.0, &state.v.apply(&self.velocity_dissipation)?)?;
        }
        Ok(rhs)
    }

    fn magnetic_from(&self, phys: &Physical, state: &SimState, diss: Dissipation) -> Result<SpectralVector> {
        let n = phys.len();
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for (i, out_i) in out.iter_mut().enumerate() {
            for p in 0..n {
                // (b·∇)uᵢ - (u·∇)bᵢ
                out_i[p] = phys.b[0][p] * phys.du[i][0][p] + phys.b[1][p] * phys.du[i][1][p]
                    - (phys.u[0][p] * phys.db[i][0][p] + phys.u[1][p] * phys.db[i][1][p]);
            }
        }
        let mut rhs = to_spectral_pair(&self.grid, &out[0], &out[1])?;
        let defect = rhs.divergence_defect();
        if defect > MAGNETIC_REPROJECT_TOL {
            log::warn!("magnetic right-hand side divergence drift {defect:.3e}; re-projecting");
            rhs = fields::leray_project(&rhs);
        }
        clear_mean(rhs.components_mut());
        if diss == Dissipation::Explicit {
            rhs.axpy(-1.0, &state.b.apply(&self.magnetic_dissipation)?)?;
        }
        Ok(rhs)
    }

    /// `P[-(u·∇)v - Σⱼ vⱼ∇uⱼ + (b·∇)b]`, minus the dissipation when explicit.
    /// The `Σⱼ vⱼ∇uⱼ` term is absent for [`SystemVariant::AppendixA`].
    pub fn velocity(&self, state: &SimState, diss: Dissipation) -> Result<SpectralVector> {
        self.check(state)?;
        self.velocity_from(&Physical::of(state)?, state, diss)
    }

    /// `(b·∇)u - (u·∇)b`, minus the dissipation when explicit.
    pub fn magnetic(&self, state: &SimState, diss: Dissipation) -> Result<SpectralVector> {
        self.check(state)?;
        self.magnetic_from(&Physical::of(state)?, state, diss)
    }

    /// Both right-hand sides from one set of transforms.
    pub fn both(&self, state: &SimState, diss: Dissipation) -> Result<(SpectralVector, SpectralVector)> {
        self.check(state)?;
        let phys = Physical::of(state)?;
        Ok((
            self.velocity_from(&phys, state, diss)?,
            self.magnetic_from(&phys, state, diss)?,
        ))
    }

    /// Magnetic right-hand side in divergence form `∇·(b⊗u - u⊗b)` with
    /// `(∇·M)ᵢ = ∂ⱼMⱼᵢ`.
    pub fn magnetic_divergence_form(&self, state: &SimState, diss: Dissipation) -> Result<SpectralVector> {
        self.check(state)?;
        let grid = &self.grid;
        let [b1, b2] = state.b.components();
        let [u1, u2] = state.u.components();
        let real = grid.backward_many(&[b1, b2, u1, u2])?;
        let (b, u) = ([&real[0], &real[1]], [&real[2], &real[3]]);
        let n = grid.len();
        // m[j][i] = bⱼuᵢ - uⱼbᵢ
        let mut m: Vec<Vec<f64>> = Vec::with_capacity(4);
        for j in 0..2 {
            for i in 0..2 {
                m.push((0..n).map(|p| b[j][p] * u[i][p] - u[j][p] * b[i][p]).collect());
            }
        }
        let (m00, m01) = grid.forward_pair(&m[0], &m[1])?;
        let (m10, m11) = grid.forward_pair(&m[2], &m[3])?;
        let mut tensor = [[m00, m01], [m10, m11]];
        tensor
            .iter_mut()
            .flatten()
            .for_each(crate::spectral::dealias_in_place);
        let comp = |i: usize| -> Result<SpectralScalar> {
            fields::partial(&tensor[0][i], 0).add(&fields::partial(&tensor[1][i], 1))
        };
        let mut rhs = SpectralVector::new(comp(0)?, comp(1)?)?;
        if diss == Dissipation::Explicit {
            rhs.axpy(-1.0, &state.b.apply(&self.magnetic_dissipation)?)?;
        }
        Ok(rhs)
    }

    /// Vorticity form: `-u·∇ω + ∇⊥∇·(b⊗b)`, with `-Σᵢ ∇⊥uᵢ·∂ᵢv` added for
    /// [`SystemVariant::AppendixA`], minus the dissipation when explicit.
    pub fn vorticity(&self, state: &SimState, diss: Dissipation) -> Result<Vorticity> {
        self.check(state)?;
        let grid = &self.grid;
        let n = grid.len();
        let omega = &state.omega.0;
        let d_omega = [fields::partial(omega, 0), fields::partial(omega, 1)];
        let [u1, u2] = state.u.components();
        let [b1, b2] = state.b.components();
        let mut inputs: Vec<&SpectralScalar> = vec![u1, u2, &d_omega[0], &d_omega[1], b1, b2];
        let extra_term = self.config.variant == SystemVariant::AppendixA;
        let derivs: Vec<SpectralScalar> = if extra_term {
            let mut d = Vec::with_capacity(8);
            for f in [&state.u, &state.v] {
                for c in f.components() {
                    d.push(fields::partial(c, 0));
                    d.push(fields::partial(c, 1));
                }
            }
            d
        } else {
            Vec::new()
        };
        inputs.extend(derivs.iter());
        let real = grid.backward_many(&inputs)?;

        // transport and the extra appendix term share one transform
        let mut transport = vec![0.0; n];
        for (p, t) in transport.iter_mut().enumerate() {
            *t = -(real[0][p] * real[2][p] + real[1][p] * real[3][p]);
        }
        if extra_term {
            // du[i][j] = real[6 + 2i + j], dv[i][j] = real[10 + 2i + j]
            let du = |i: usize, j: usize| &real[6 + 2 * i + j];
            let dv = |i: usize, j: usize| &real[10 + 2 * i + j];
            for (p, t) in transport.iter_mut().enumerate() {
                let mut acc = 0.0;
                for i in 0..2 {
                    // ∇⊥uᵢ·∂ᵢv = -∂₂uᵢ ∂ᵢv₁ + ∂₁uᵢ ∂ᵢv₂
                    acc += -du(i, 1)[p] * dv(0, i)[p] + du(i, 0)[p] * dv(1, i)[p];
                }
                *t -= acc;
            }
        }

        let (bx, by) = (&real[4], &real[5]);
        let b11: Vec<f64> = (0..n).map(|p| bx[p] * bx[p]).collect();
        let b12: Vec<f64> = (0..n).map(|p| bx[p] * by[p]).collect();
        let b22: Vec<f64> = (0..n).map(|p| by[p] * by[p]).collect();
        let (mut t_hat, mut p11) = grid.forward_pair(&transport, &b11)?;
        let (mut p12, mut p22) = grid.forward_pair(&b12, &b22)?;
        for f in [&mut t_hat, &mut p11, &mut p12, &mut p22] {
            dealias_in_place(f);
        }
        // ∇·(b⊗b) then its scalar curl
        let div1 = fields::partial(&p11, 0).add(&fields::partial(&p12, 1))?;
        let div2 = fields::partial(&p12, 0).add(&fields::partial(&p22, 1))?;
        let lorentz = fields::curl(&SpectralVector::new(div1, div2)?);
        let mut rhs = t_hat.add(&lorentz)?;
        clear_mean(std::slice::from_mut(&mut rhs));
        if diss == Dissipation::Explicit {
            rhs.axpy(-1.0, &self.velocity_dissipation.apply(omega)?)?;
        }
        Ok(Vorticity(rhs))
    }
}

/// Every nonlinear term is a derivative on the torus, so its mean is zero up
/// to round-off in the products; pin it so the means of `v` and `b` are
/// exactly invariant.
fn clear_mean(fields: &mut [SpectralScalar]) {
    for f in fields {
        if let Some(i) = f.grid().index_of(0, 0) {
            f.coeffs_mut()[i] = Complex64::new(0.0, 0.0);
        }
    }
}

/// `‖curl(velocity rhs) - vorticity rhs‖ / ‖vorticity rhs‖`; both forms
/// include the dissipation.
pub fn curl_consistency_defect(ev: &RhsEvaluator, state: &SimState) -> Result<f64> {
    let from_primitive = fields::curl(&ev.velocity(state, Dissipation::Explicit)?);
    let direct = ev.vorticity(state, Dissipation::Explicit)?.0;
    let scale = direct.norm_sq().sqrt().max(from_primitive.norm_sq().sqrt());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(from_primitive.sub(&direct)?.norm_sq().sqrt() / scale)
}

pub fn rhs_velocity(state: &SimState, config: &SystemConfig, diss: Dissipation) -> Result<SpectralVector> {
    RhsEvaluator::new(config, state.grid())?.velocity(state, diss)
}

pub fn rhs_magnetic(state: &SimState, config: &SystemConfig, diss: Dissipation) -> Result<SpectralVector> {
    RhsEvaluator::new(config, state.grid())?.magnetic(state, diss)
}

pub fn rhs_vorticity(state: &SimState, config: &SystemConfig, diss: Dissipation) -> Result<Vorticity> {
    RhsEvaluator::new(config, state.grid())?.vorticity(state, diss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use num_complex::Complex64;

    #[test]
    fn config_validation() {
        assert!(SystemConfig::thm1(0.8, 0.5).unwrap().covered_regime());
        assert!(!SystemConfig::thm1(0.7, 0.5).unwrap().covered_regime());
        // boundary β = 1 - γ/2 is not covered
        assert!(!SystemConfig::thm1(0.75, 0.5).unwrap().covered_regime());
        assert!(SystemConfig::thm2(1.2, 0.8, LogSymbol::Log14).is_ok());
        let err = SystemConfig::thm2(1.2, 0.7, LogSymbol::Log14).unwrap_err();
        assert!(err.to_string().contains("α+γ=2 with α∈(0,2]"));
        assert!(SystemConfig::thm2(0.0, 2.0, LogSymbol::Log14).is_err());
        assert!(SystemConfig::new(SystemVariant::Thm1, 0.0, 0.8, 0.5, Some(LogSymbol::Log14)).is_err());
        assert!(SystemConfig::new(SystemVariant::Thm2, 1.0, 0.0, 1.0, None).is_err());
        assert!(SystemConfig::new(SystemVariant::Thm1, 0.1, 0.8, 0.5, None).is_err());
        assert!(SystemConfig::general(2.5, 0.0, 0.0).is_err());
        assert!(SystemConfig::appendix_a(0.6).unwrap().covered_regime());
        assert!(!SystemConfig::appendix_a(0.5).unwrap().covered_regime());
        assert!(SystemConfig::thm3(LogSymbol::Log12).unwrap().covered_regime());
        assert!(!SystemConfig::thm2(1.0, 1.0, LogSymbol::Log12).unwrap().covered_regime());
    }

    #[test]
    fn dissipation_symbols() {
        let thm1 = SystemConfig::thm1(0.8, 0.5).unwrap();
        assert_eq!(dissipation_symbol(&thm1, Equation::Velocity), SymbolSpec::Zero);
        assert_eq!(dissipation_symbol(&thm1, Equation::Magnetic), SymbolSpec::FracPower(0.8));
        let thm3 = SystemConfig::thm3(LogSymbol::Log12).unwrap();
        assert_eq!(dissipation_symbol(&thm3, Equation::Velocity), SymbolSpec::Zero);
        assert_eq!(dissipation_symbol(&thm3, Equation::Magnetic), SymbolSpec::Zero);
        let app = SystemConfig::appendix_a(0.6).unwrap();
        assert_eq!(dissipation_symbol(&app, Equation::Velocity), SymbolSpec::Zero);

        let thm2 = SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap();
        assert_eq!(dissipation_symbol(&thm2, Equation::Magnetic), SymbolSpec::Zero);
        let m = dissipation_symbol(&thm2, Equation::Velocity).eval_k_sq(1.0).unwrap();
        // 1/√(ln(e+1)), computed independently
        assert!((m - 0.872_618_392_892_712_3).abs() < 1e-14, "{m}");
    }

    #[test]
    fn zero_state_rhs_is_zero() {
        let grid = make_grid(16).unwrap();
        for config in [
            SystemConfig::thm1(0.8, 0.5).unwrap(),
            SystemConfig::appendix_a(0.6).unwrap(),
            SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap(),
        ] {
            let s = SimState::zero(&grid, &config).unwrap();
            let ev = RhsEvaluator::new(&config, &grid).unwrap();
            assert_eq!(ev.velocity(&s, Dissipation::Explicit).unwrap().norm_sq(), 0.0);
            assert_eq!(ev.magnetic(&s, Dissipation::Explicit).unwrap().norm_sq(), 0.0);
            assert_eq!(ev.vorticity(&s, Dissipation::Explicit).unwrap().0.norm_sq(), 0.0);
        }
    }

    #[test]
    fn stale_cache_is_rejected() {
        let grid = make_grid(16).unwrap();
        let a = SystemConfig::thm1(0.8, 0.5).unwrap();
        let b = SystemConfig::thm1(0.8, 1.0).unwrap();
        let s = SimState::zero(&grid, &a).unwrap();
        assert!(matches!(
            rhs_velocity(&s, &b, Dissipation::Omitted),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn non_solenoidal_state_is_rejected() {
        let grid = make_grid(16).unwrap();
        let config = SystemConfig::thm1(0.8, 0.5).unwrap();
        let v = SpectralVector::from_fn(&grid, |x, _| x.cos(), |_, _| 0.0).unwrap();
        assert!(SimState::new(v.clone(), v.clone(), 0.0, &config).is_err());
        let s = SimState::projected(&v, &v, 0.0, &config).unwrap();
        assert!(s.v().norm_sq() < 1e-30);
    }

    #[test]
    fn cache_matches_fresh_derivation() {
        let grid = make_grid(16).unwrap();
        let config = SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap();
        let psi = SpectralScalar::single_mode(&grid, 2, 1, Complex64::new(0.3, -0.2)).unwrap();
        let v = fields::perp_gradient(&psi);
        let s = SimState::new(v.clone(), v, 0.0, &config).unwrap();
        assert!(s.cache_deviation(&config).unwrap() <= 1e-14);
    }
}
