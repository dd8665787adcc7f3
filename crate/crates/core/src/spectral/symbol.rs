//! Radial Fourier multipliers: fractional powers `|k|^{2σ}`, logarithmic
//! weights `1/g(|k|)`, the regularizing filter `1 + |k|^{2γ}/g²(|k|)` and
//! its inverse.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::field::SpectralScalar;
use crate::spectral::grid::Grid;

/// Which divergence integral a weight `g` is tested against:
/// `∫ dτ / (τ √(ln τ) g²(τ))` or the same with `g` in place of `g²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthForm {
    Squared,
    Plain,
}

impl GrowthForm {
    pub fn power(self) -> i32 {
        match self {
            GrowthForm::Squared => 2,
            GrowthForm::Plain => 1,
        }
    }
}

/// Non-decreasing piecewise-linear weight given by `(τ, g)` knots, constant
/// beyond both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneTable {
    knots: Vec<(f64, f64)>,
}

impl MonotoneTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Domain("custom g table is empty".into()));
        }
        for &(tau, g) in &knots {
            if !tau.is_finite() || tau < 0.0 || !g.is_finite() {
                return Err(Error::Domain(format!("invalid g knot ({tau}, {g})")));
            }
            if g < 1.0 {
                return Err(Error::Domain(format!("g({tau}) = {g} < 1")));
            }
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Domain("g table abscissae must increase strictly".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Domain("g table must be non-decreasing".into()));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let k = &self.knots;
        if tau <= k[0].0 {
            return k[0].1;
        }
        let last = k[k.len() - 1];
        if tau >= last.0 {
            return last.1;
        }
        let pos = k.partition_point(|&(t, _)| t <= tau);
        let (t0, g0) = k[pos - 1];
        let (t1, g1) = k[pos];
        g0 + (g1 - g0) * (tau - t0) / (t1 - t0)
    }
}

/// Logarithmic weight `g(τ) ≥ 1`, non-decreasing on `τ ≥ 0`.
///
/// The built-in families are products of iterated logarithms
/// `ℓ₁ = ln(e+τ)`, `ℓ₂ = ln(e+ℓ₁)`, `ℓ₃ = ln(e+ℓ₂)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LogSymbol {
    /// `g ≡ 1`
    Const1,
    /// `ℓ₁^{1/4}`
    Log14,
    /// `ℓ₁^{1/4} ℓ₂^{1/2}`
    Log14LogLog,
    /// `ℓ₁^{1/4} (ℓ₂ ℓ₃)^{1/2}`
    Log14LogLogLog,
    /// `ℓ₁^{1/2}`
    Log12,
    /// `ℓ₁^{1/2} ℓ₂`
    Log12LogLog,
    /// `ℓ₁^{1/2} ℓ₂ ℓ₃`
    Log12LogLogLog,
    Table(MonotoneTable),
}

impl LogSymbol {
    pub const FAMILIES: [&'static str; 7] = [
        "const1",
        "log14",
        "log14_loglog",
        "log14_logloglog",
        "log12",
        "log12_loglog",
        "log12_logloglog",
    ];

    pub fn eval(&self, tau: f64) -> f64 {
        let tau = tau.abs();
        let l1 = || (std::f64::consts::E + tau).ln();
        let l2 = |l1: f64| (std::f64::consts::E + l1).ln();
        match self {
            LogSymbol::Const1 => 1.0,
            LogSymbol::Log14 => l1().powf(0.25),
            LogSymbol::Log14LogLog => {
                let a = l1();
                a.powf(0.25) * l2(a).sqrt()
            }
            LogSymbol::Log14LogLogLog => {
                let a = l1();
                let b = l2(a);
                a.powf(0.25) * (b * l2(b)).sqrt()
            }
            LogSymbol::Log12 => l1().sqrt(),
            LogSymbol::Log12LogLog => {
                let a = l1();
                a.sqrt() * l2(a)
            }
            LogSymbol::Log12LogLogLog => {
                let a = l1();
                let b = l2(a);
                a.sqrt() * b * l2(b)
            }
            LogSymbol::Table(t) => t.eval(tau),
        }
    }

    pub fn family_id(&self) -> &'static str {
        match self {
            LogSymbol::Const1 => "const1",
            LogSymbol::Log14 => "log14",
            LogSymbol::Log14LogLog => "log14_loglog",
            LogSymbol::Log14LogLogLog => "log14_logloglog",
            LogSymbol::Log12 => "log12",
            LogSymbol::Log12LogLog => "log12_loglog",
            LogSymbol::Log12LogLogLog => "log12_logloglog",
            LogSymbol::Table(_) => "custom_table",
        }
    }

    /// Numeric family id used in checkpoints (`0` is reserved for "no g").
    pub fn numeric_id(&self) -> u32 {
        match self {
            LogSymbol::Const1 => 1,
            LogSymbol::Log14 => 2,
            LogSymbol::Log14LogLog => 3,
            LogSymbol::Log14LogLogLog => 4,
            LogSymbol::Log12 => 5,
            LogSymbol::Log12LogLog => 6,
            LogSymbol::Log12LogLogLog => 7,
            LogSymbol::Table(_) => 255,
        }
    }

    pub fn from_numeric_id(id: u32) -> Option<Self> {
        Some(match id {
            1 => LogSymbol::Const1,
            2 => LogSymbol::Log14,
            3 => LogSymbol::Log14LogLog,
            4 => LogSymbol::Log14LogLogLog,
            5 => LogSymbol::Log12,
            6 => LogSymbol::Log12LogLog,
            7 => LogSymbol::Log12LogLogLog,
            _ => return None,
        })
    }

    /// Built-in family by name; `custom_table` needs its knots and is not
    /// constructed here.
    pub fn from_family_id(id: &str) -> Option<Self> {
        Some(match id {
            "const1" => LogSymbol::Const1,
            "log14" => LogSymbol::Log14,
            "log14_loglog" => LogSymbol::Log14LogLog,
            "log14_logloglog" => LogSymbol::Log14LogLogLog,
            "log12" => LogSymbol::Log12,
            "log12_loglog" => LogSymbol::Log12LogLog,
            "log12_logloglog" => LogSymbol::Log12LogLogLog,
            _ => return None,
        })
    }

    /// Exponents `(p, q, r)` of the asymptotic form
    /// `g ~ (ln τ)^p (ln ln τ)^q (ln ln ln τ)^r`; `None` for tables.
    pub fn log_exponents(&self) -> Option<(f64, f64, f64)> {
        Some(match self {
            LogSymbol::Const1 => (0.0, 0.0, 0.0),
            LogSymbol::Log14 => (0.25, 0.0, 0.0),
            LogSymbol::Log14LogLog => (0.25, 0.5, 0.0),
            LogSymbol::Log14LogLogLog => (0.25, 0.5, 0.5),
            LogSymbol::Log12 => (0.5, 0.0, 0.0),
            LogSymbol::Log12LogLog => (0.5, 1.0, 0.0),
            LogSymbol::Log12LogLogLog => (0.5, 1.0, 1.0),
            LogSymbol::Table(_) => return None,
        })
    }

    /// Whether `∫_e^∞ dτ / (τ √(ln τ) g^m(τ))` diverges.
    ///
    /// With `x = ln τ` the integrand becomes `x^{-1/2-mp} (ln x)^{-mq}
    /// (ln ln x)^{-mr}`, whose integral diverges iff the exponent triple is
    /// lexicographically at most `(1, 1, 1)`. Tables are constant beyond
    /// their last knot, so their integral always diverges.
    pub fn satisfies_growth(&self, form: GrowthForm) -> bool {
        let Some((p, q, r)) = self.log_exponents() else {
            return true;
        };
        let m = form.power() as f64;
        let a = 0.5 + m * p;
        let b = m * q;
        let c = m * r;
        const EPS: f64 = 1e-12;
        if (a - 1.0).abs() > EPS {
            return a < 1.0;
        }
        if (b - 1.0).abs() > EPS {
            return b < 1.0;
        }
        c <= 1.0 + EPS
    }
}

/// `|k|^{2σ}` from `|k|²` with the zero-mode convention `0^0 = 1`.
pub fn frac_power(k_sq: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        1.0
    } else if k_sq == 0.0 {
        0.0
    } else {
        k_sq.powf(sigma)
    }
}

/// A radial Fourier multiplier `m(|k|)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSpec {
    /// `m ≡ 0`
    Zero,
    /// `|k|^{2σ}`, the symbol of `(-Δ)^σ`.
    FracPower(f64),
    /// `1/g(|k|)`
    LogWeight(LogSymbol),
    /// `1 + |k|^{2γ}/g²(|k|)`, mapping the filtered velocity `u` to `v`.
    Filter { gamma: f64, g: Option<LogSymbol> },
    /// `1 / (1 + |k|^{2γ}/g²(|k|))`
    InverseFilter { gamma: f64, g: Option<LogSymbol> },
    /// Pointwise product of the members.
    Composite(Vec<SymbolSpec>),
}

fn check_exponent(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=2.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} outside [0, 2]")))
    }
}

fn weight(g: &LogSymbol, radius: f64) -> Result<f64> {
    let value = g.eval(radius);
    if value.is_finite() && value >= 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain(format!(
            "g({radius}) = {value} violates g ≥ 1"
        )))
    }
}

impl SymbolSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SymbolSpec::Zero | SymbolSpec::LogWeight(_) => Ok(()),
            SymbolSpec::FracPower(s) => check_exponent("σ", *s),
            SymbolSpec::Filter { gamma, .. } | SymbolSpec::InverseFilter { gamma, .. } => {
                check_exponent("γ", *gamma)
            }
            SymbolSpec::Composite(parts) => parts.iter().try_for_each(SymbolSpec::validate),
        }
    }

    /// Evaluates the symbol at a lattice point given `|k|²`.
    pub fn eval_k_sq(&self, k_sq: f64) -> Result<f64> {
        Ok(match self {
            SymbolSpec::Zero => 0.0,
            SymbolSpec::FracPower(s) => frac_power(k_sq, *s),
            SymbolSpec::LogWeight(g) => 1.0 / weight(g, k_sq.sqrt())?,
            SymbolSpec::Filter { gamma, g } => filter_value(k_sq, *gamma, g.as_ref())?,
            SymbolSpec::InverseFilter { gamma, g } => 1.0 / filter_value(k_sq, *gamma, g.as_ref())?,
            SymbolSpec::Composite(parts) => {
                let mut m = 1.0;
                for p in parts {
                    m *= p.eval_k_sq(k_sq)?;
                }
                m
            }
        })
    }
}

fn filter_value(k_sq: f64, gamma: f64, g: Option<&LogSymbol>) -> Result<f64> {
    let p = frac_power(k_sq, gamma);
    Ok(match g {
        None => 1.0 + p,
        Some(g) => {
            let w = weight(g, k_sq.sqrt())?;
            1.0 + p / (w * w)
        }
    })
}

/// Per-mode values of a [`SymbolSpec`] on one grid.
#[derive(Clone, Debug)]
pub struct MultiplierTable {
    n: usize,
    values: Vec<f64>,
}

/// Tabulates `spec` on every lattice mode of `grid`.
pub fn eval_symbol(spec: &SymbolSpec, grid: &Grid) -> Result<MultiplierTable> {
    spec.validate()?;
    let mut values = Vec::with_capacity(grid.len());
    // the lattice has few distinct radii; reuse the last evaluation along a row
    let mut last = (f64::NAN, 0.0);
    for &k_sq in grid.k_sq() {
        if k_sq != last.0 {
            last = (k_sq, spec.eval_k_sq(k_sq)?);
        }
        values.push(last.1);
    }
    Ok(MultiplierTable { n: grid.n(), values })
}

impl MultiplierTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check(&self, field: &SpectralScalar) -> Result<()> {
        if field.grid().n() == self.n {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: field.grid().n(),
            })
        }
    }

    pub fn apply(&self, field: &SpectralScalar) -> Result<SpectralScalar> {
        self.check(field)?;
        Ok(field.map_modes(|i, c| c * self.values[i]))
    }

    pub fn apply_in_place(&self, field: &mut SpectralScalar) -> Result<()> {
        self.check(field)?;
        for (c, &m) in field.coeffs_mut().iter_mut().zip(&self.values) {
            *c *= m;
        }
        Ok(())
    }

    /// `Σ m(k) Re(conj(a(k)) b(k))`
    pub fn weighted_inner(&self, a: &SpectralScalar, b: &SpectralScalar) -> Result<f64> {
        self.check(a)?;
        a.check_grid(b)?;
        Ok(a.coeffs()
            .iter()
            .zip(b.coeffs())
            .zip(&self.values)
            .map(|((x, y), m)| m * (x.re * y.re + x.im * y.im))
            .sum())
    }

    /// Elementwise `exp(-m·t)`, the integrating factor of `∂ₜw = -m w`.
    pub fn decay_factors(&self, t: f64) -> Vec<f64> {
        self.values.iter().map(|m| (-m * t).exp()).collect()
    }
}

/// Scales every coefficient by the symbol. Real radial symbols commute with
/// `k ↦ -k`, so real fields stay real.
pub fn apply_multiplier(field: &SpectralScalar, spec: &SymbolSpec) -> Result<SpectralScalar> {
    eval_symbol(spec, field.grid())?.apply(field)
}

/// Recovers `u` from `v = u + (-Δ)^γ L² u`.
pub fn invert_filter(v: &SpectralScalar, gamma: f64, g: Option<&LogSymbol>) -> Result<SpectralScalar> {
    apply_multiplier(
        v,
        &SymbolSpec::InverseFilter {
            gamma,
            g: g.cloned(),
        },
    )
}

/// Zeros every mode outside the two-thirds mask.
pub fn dealias(field: &SpectralScalar) -> SpectralScalar {
    let mut out = field.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(field: &mut SpectralScalar) {
    let grid: Arc<Grid> = field.grid().clone();
    for (c, &keep) in field.coeffs_mut().iter_mut().zip(grid.mask()) {
        if !keep {
            *c = Default::default();
        }
    }
}
