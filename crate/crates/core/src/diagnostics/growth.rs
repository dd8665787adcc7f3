//! Partial integrals `I(X) = ∫_e^X dτ / (τ √(ln τ) g^m(τ))` with `m = 2`
//! (squared form) or `m = 1` (plain form).
//!
//! With `τ = exp(y²)` the integral becomes `∫_1^{√ln X} 2 dy / g^m(e^{y²})`,
//! whose integrand is bounded and smooth, and is evaluated by adaptive
//! Gauss–Kronrod quadrature.

use crate::error::{Error, Result};
use crate::spectral::{GrowthForm, LogSymbol};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x)? + f(c + x)?;
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Adaptive 7/15-point Gauss–Kronrod quadrature to absolute tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 48;
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (value, err) = kronrod(&mut f, lo, hi)?;
        if err <= t.max(1e-15 * value.abs()) || depth >= MAX_DEPTH {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, t / 2.0, depth + 1));
            stack.push((mid, hi, t / 2.0, depth + 1));
        }
    }
    Ok(total)
}

/// `I(X)` for an arbitrary weight `g ≥ 1`.
pub fn partial_integral_fn(g: impl Fn(f64) -> f64, form: GrowthForm, x: f64) -> Result<f64> {
    if !(x >= std::f64::consts::E) {
        return Err(Error::Domain(format!("upper limit X = {x} must be at least e")));
    }
    let y_max = x.ln().sqrt();
    let m = form.power();
    integrate(
        |y| {
            let tau = (y * y).exp();
            let gv = g(tau);
            if !(gv >= 1.0) {
                return Err(Error::Domain(format!("g({tau:e}) = {gv} violates g ≥ 1")));
            }
            Ok(2.0 / gv.powi(m))
        },
        1.0,
        y_max,
        1e-13,
    )
}

pub fn partial_integral(g: &LogSymbol, form: GrowthForm, x: f64) -> Result<f64> {
    partial_integral_fn(|t| g.eval(t), form, x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthTrend {
    /// Increments across the last decades stay non-negligible.
    Growing,
    /// The table has stopped moving.
    Saturating,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub form: GrowthForm,
    /// `(X, I(X))` on the ladder.
    pub table: Vec<(f64, f64)>,
    pub trend: GrowthTrend,
    /// Slope of `I` against `ln ln X` over the last two ladder points.
    pub tail_slope: f64,
}

/// Ladder `10, 100, …` up to `x_max` (with `x_max` itself appended).
pub fn ladder(x_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = 10.0;
    while x < x_max * (1.0 - 1e-12) {
        out.push(x);
        x *= 10.0;
    }
    out.push(x_max);
    out
}

/// Tabulates `I(X)` on [`ladder`]. Numerical quadrature cannot decide
/// divergence; the trend is a diagnostic.
pub fn growth_condition_report_fn(g: impl Fn(f64) -> f64, form: GrowthForm, x_max: f64) -> Result<GrowthReport> {
    if !(x_max > 10.0) || !x_max.is_finite() {
        return Err(Error::Domain(format!("X_max = {x_max} must be finite and above 10")));
    }
    let xs = ladder(x_max);
    let mut table = Vec::with_capacity(xs.len());
    // accumulate over consecutive intervals of y = √ln X
    let mut acc = partial_integral_fn(&g, form, xs[0])?;
    table.push((xs[0], acc));
    let m = form.power();
    for w in xs.windows(2) {
        let (lo, hi) = (w[0].ln().sqrt(), w[1].ln().sqrt());
        acc += integrate(
            |y| {
                let tau = (y * y).exp();
                let gv = g(tau);
                if !(gv >= 1.0) {
                    return Err(Error::Domain(format!("g({tau:e}) = {gv} violates g ≥ 1")));
                }
                Ok(2.0 / gv.powi(m))
            },
            lo,
            hi,
            1e-13,
        )?;
        table.push((w[1], acc));
    }
    let (tail_slope, last_increment) = match table.as_slice() {
        [.., (x0, i0), (x1, i1)] => ((i1 - i0) / (x1.ln().ln() - x0.ln().ln()), i1 - i0),
        _ => (0.0, 0.0),
    };
    let trend = if last_increment > 1e-9 * acc.abs().max(1.0) {
        GrowthTrend::Growing
    } else {
        GrowthTrend::Saturating
    };
    Ok(GrowthReport {
        form,
        table,
        trend,
        tail_slope,
    })
}

pub fn growth_condition_report(g: &LogSymbol, form: GrowthForm, x_max: f64) -> Result<GrowthReport> {
    growth_condition_report_fn(|t| g.eval(t), form, x_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_for_constant_weight() {
        for x in [4f64.exp(), 100.0, 1e8] {
            let i = partial_integral(&LogSymbol::Const1, GrowthForm::Squared, x).unwrap();
            let expect = 2.0 * (x.ln().sqrt() - 1.0);
            assert!((i - expect).abs() < 1e-12, "{x}: {i} vs {expect}");
        }
    }

    #[test]
    fn quadrature_of_polynomial_is_exact() {
        let v = integrate(|x| Ok(x.powi(5) - 3.0 * x), 0.0, 2.0, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn rapidly_growing_weight_saturates() {
        let r = growth_condition_report_fn(|t| t.min(700.0).exp(), GrowthForm::Squared, 1e12).unwrap();
        assert_eq!(r.trend, GrowthTrend::Saturating);
        let r = growth_condition_report(&LogSymbol::Log14, GrowthForm::Squared, 1e12).unwrap();
        assert_eq!(r.trend, GrowthTrend::Growing);
        assert!(r.table.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn weight_below_one_is_rejected() {
        assert!(partial_integral_fn(|_| 0.5, GrowthForm::Plain, 100.0).is_err());
    }
}
