use crate::dynamics::{dissipation_symbol, Equation, SimState, SystemConfig};
use crate::error::{Error, Result};
use crate::spectral::{eval_symbol, SymbolSpec};

use super::DiagnosticsRecord;

/// Pieces of the conserved-or-dissipated quadratic functional
/// `‖u‖² + ‖Λ^γ L u‖² + ‖b‖²`. For the appendix system (`γ = 1`, no `L`)
/// the middle term is `‖∇u‖²`; for THM3 it is `‖(Λ²/g) u‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct EnergyParts {
    pub u_sq: f64,
    pub filtered_u_sq: f64,
    pub b_sq: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.u_sq + self.filtered_u_sq + self.b_sq
    }
}

pub fn energy_parts(state: &SimState, config: &SystemConfig) -> Result<EnergyParts> {
    state.check_cache(config)?;
    let weight = SymbolSpec::Composite(match config.g() {
        Some(g) => vec![
            SymbolSpec::FracPower(config.gamma()),
            SymbolSpec::LogWeight(g.clone()),
            SymbolSpec::LogWeight(g.clone()),
        ],
        None => vec![SymbolSpec::FracPower(config.gamma())],
    });
    let table = eval_symbol(&weight, state.grid())?;
    let mut filtered = 0.0;
    for c in state.u().components() {
        filtered += table.weighted_inner(c, c)?;
    }
    Ok(EnergyParts {
        u_sq: state.u().norm_sq(),
        filtered_u_sq: filtered,
        b_sq: state.b().norm_sq(),
    })
}

/// Total energy `Re⟨u, v⟩ + ‖b‖²`, which equals [`EnergyParts::total`].
pub fn energy(state: &SimState, config: &SystemConfig) -> Result<f64> {
    state.check_cache(config)?;
    Ok(state.u().inner(state.v())? + state.b().norm_sq())
}

/// Instantaneous dissipation rate `Σ m_v Re(conj(û) v̂) + Σ m_b |b̂|²`, so that
/// `dE/dt = -2 D`.
pub fn dissipation_rate(state: &SimState, config: &SystemConfig) -> Result<f64> {
    state.check_cache(config)?;
    let mv = eval_symbol(&dissipation_symbol(config, Equation::Velocity), state.grid())?;
    let mb = eval_symbol(&dissipation_symbol(config, Equation::Magnetic), state.grid())?;
    let mut d = 0.0;
    for i in 0..2 {
        d += mv.weighted_inner(&state.u().components()[i], &state.v().components()[i])?;
        d += mb.weighted_inner(&state.b().components()[i], &state.b().components()[i])?;
    }
    Ok(d)
}

/// `|ΔE + 2 ΔQ| / max(E, 1)` between two records of one run, where `Q` is
/// the accumulated dissipation integral and `E` the earlier energy.
pub fn energy_balance_residual(prev: &DiagnosticsRecord, next: &DiagnosticsRecord) -> Result<f64> {
    if next.step <= prev.step || next.t < prev.t {
        return Err(Error::Precondition(format!(
            "records out of order: step {} (t = {}) then step {} (t = {})",
            prev.step, prev.t, next.step, next.t
        )));
    }
    let delta_e = next.energy_total - prev.energy_total;
    let delta_q = next.dissipated - prev.dissipated;
    Ok((delta_e + 2.0 * delta_q).abs() / prev.energy_total.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::SpectralVector;
    use crate::spectral::{make_grid, LogSymbol};

    #[test]
    fn filter_identity_example() {
        let grid = make_grid(32).unwrap();
        let config = crate::SystemConfig::general(0.0, 0.0, 1.0).unwrap();
        // u = cos(x₁)e₂ ⇒ v = 2u
        let v = SpectralVector::from_fn(&grid, |_, _| 0.0, |x, _| 2.0 * x.cos()).unwrap();
        let s = SimState::new(v, SpectralVector::zeros(&grid), 0.0, &config).unwrap();
        let parts = energy_parts(&s, &config).unwrap();
        let u_sq = s.u().norm_sq();
        assert!((u_sq - 0.5).abs() < 1e-15);
        assert!((parts.filtered_u_sq - u_sq).abs() < 1e-15);
        assert!((energy(&s, &config).unwrap() - 2.0 * u_sq).abs() < 1e-15);
    }

    #[test]
    fn zero_state_energy() {
        let grid = make_grid(16).unwrap();
        let config = crate::SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap();
        let s = SimState::zero(&grid, &config).unwrap();
        assert_eq!(energy(&s, &config).unwrap(), 0.0);
        assert_eq!(dissipation_rate(&s, &config).unwrap(), 0.0);
    }
}
