use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{self, Vorticity};
use crate::spectral::{eval_symbol, Grid, SymbolSpec};

use super::norms::{grad_linf, linf_norm, sobolev_norm};

/// Outcome of checking the filtered-velocity multiplier bounds.
#[derive(Clone, Debug)]
pub struct MultiplierBoundReport {
    pub gamma: f64,
    pub s: f64,
    pub sigma: f64,
    /// `max |k|^{σ-1} / (1 + |k|^{2γ})` over nonzero lattice modes.
    pub max_symbol: f64,
    pub symbol_ok: bool,
    /// `‖Λ^{s+σ} u‖ / ‖Λ^s ω‖` on the sample field.
    pub sobolev_ratio: f64,
    /// `‖∇u‖_∞ / (‖ω‖ + ‖ω‖_∞)` on the sample field; recorded, not asserted.
    pub gradient_ratio: f64,
}

impl MultiplierBoundReport {
    /// Whether the asserted part holds. The symbol bound is only claimed for
    /// `σ ≤ 1 + 2γ`.
    pub fn claimed(&self) -> bool {
        self.sigma <= 1.0 + 2.0 * self.gamma
    }
}

/// Evaluates `|k|^{σ-1}/(1+|k|^{2γ})` on the lattice and measures the induced
/// norm ratios for `u = (1 + Λ^{2γ})^{-1} v` on a seeded random sample `v`
/// with `ω = curl v`.
pub fn multiplier_bound_check(gamma: f64, s: f64, sigma: f64, grid: &Arc<Grid>) -> Result<MultiplierBoundReport> {
    if !(0.0..=2.0).contains(&gamma) {
        return Err(Error::Domain(format!("γ = {gamma} must lie in [0, 2]")));
    }
    let mut max_symbol = 0.0_f64;
    for &q in grid.k_sq() {
        if q > 0.0 {
            let r = q.sqrt();
            max_symbol = max_symbol.max(r.powf(sigma - 1.0) / (1.0 + r.powf(2.0 * gamma)));
        }
    }
    let symbol_ok = max_symbol <= 1.0 + 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let k_max = grid.dealias_cutoff().min(8) as usize;
    let v = crate::harness::initial::random_solenoidal(grid, &mut rng, 1, k_max.max(1))?;
    let inverse = eval_symbol(&SymbolSpec::InverseFilter { gamma, g: None }, grid)?;
    let u = v.apply(&inverse)?;
    let omega = Vorticity(fields::curl(&v));
    let num = sobolev_norm(&u, s + sigma)?;
    let den = sobolev_norm(&omega, s)?;
    let sobolev_ratio = if den == 0.0 { 0.0 } else { num / den };
    let grad_den = omega.0.norm_sq().sqrt() + linf_norm(&omega)?;
    let gradient_ratio = if grad_den == 0.0 { 0.0 } else { grad_linf(&u)? / grad_den };
    Ok(MultiplierBoundReport {
        gamma,
        s,
        sigma,
        max_symbol,
        symbol_ok,
        sobolev_ratio,
        gradient_ratio,
    })
}
