use std::sync::Arc;

use crate::dynamics::{SimState, SystemConfig, SystemVariant};
use crate::error::{Error, Result};
use crate::fields::{self, SpectralVector, Vorticity};
use crate::spectral::{make_grid, Grid, SpectralScalar, SymbolSpec};

/// Anything made of one or more spectral scalar components.
pub trait FieldComponents {
    fn scalars(&self) -> Vec<&SpectralScalar>;

    fn grid(&self) -> &Arc<Grid> {
        self.scalars()[0].grid()
    }
}

impl FieldComponents for SpectralScalar {
    fn scalars(&self) -> Vec<&SpectralScalar> {
        vec![self]
    }
}

impl FieldComponents for SpectralVector {
    fn scalars(&self) -> Vec<&SpectralScalar> {
        self.components().iter().collect()
    }
}

impl FieldComponents for Vorticity {
    fn scalars(&self) -> Vec<&SpectralScalar> {
        vec![&self.0]
    }
}

pub const SOBOLEV_MIN: f64 = -2.0;
pub const SOBOLEV_MAX: f64 = 12.0;

/// `‖Λ^s f‖` with mean-normalized `L²`: `(Σ |k|^{2s} |f̂(k)|²)^{1/2}`.
/// The zero mode contributes only when `s = 0`.
pub fn sobolev_norm(f: &impl FieldComponents, s: f64) -> Result<f64> {
    if !(SOBOLEV_MIN..=SOBOLEV_MAX).contains(&s) {
        return Err(Error::Domain(format!(
            "Sobolev exponent {s} outside [{SOBOLEV_MIN}, {SOBOLEV_MAX}]"
        )));
    }
    let mut sum = 0.0;
    for c in f.scalars() {
        let k_sq = c.grid().k_sq();
        for (z, &q) in c.coeffs().iter().zip(k_sq) {
            // |k|^{2s} = (|k|²)^s
            let w = if s == 0.0 {
                1.0
            } else if q == 0.0 {
                0.0
            } else {
                q.powf(s)
            };
            sum += w * z.norm_sqr();
        }
    }
    Ok(sum.sqrt())
}

/// Pointwise Euclidean magnitude of the components on the collocation grid.
fn magnitudes(parts: &[Vec<f64>]) -> Vec<f64> {
    (0..parts[0].len())
        .map(|p| parts.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .collect()
}

fn real_parts(grid: &Grid, scalars: &[&SpectralScalar]) -> Result<Vec<Vec<f64>>> {
    grid.backward_many(scalars)
}

/// `max |f(x)|` over the collocation nodes; vector fields use the Euclidean
/// magnitude.
pub fn linf_norm(f: &impl FieldComponents) -> Result<f64> {
    let parts = real_parts(f.grid(), &f.scalars())?;
    Ok(magnitudes(&parts).into_iter().fold(0.0, f64::max))
}

/// `max |∇f(x)|` over the nodes, with the Frobenius norm of the Jacobian for
/// vector fields.
pub fn grad_linf(f: &impl FieldComponents) -> Result<f64> {
    let derivs: Vec<SpectralScalar> = f
        .scalars()
        .into_iter()
        .flat_map(|c| [fields::partial(c, 0), fields::partial(c, 1)])
        .collect();
    let refs: Vec<&SpectralScalar> = derivs.iter().collect();
    let parts = real_parts(f.grid(), &refs)?;
    Ok(magnitudes(&parts).into_iter().fold(0.0, f64::max))
}

/// Copies the coefficients onto a grid `factor` times finer.
pub fn refine(f: &SpectralScalar, fine: &Arc<Grid>) -> Result<SpectralScalar> {
    let coarse = f.grid();
    if fine.n() < coarse.n() {
        return Err(Error::Domain(format!(
            "cannot refine from n = {} to n = {}",
            coarse.n(),
            fine.n()
        )));
    }
    let mut out = SpectralScalar::zeros(fine);
    for (idx, &c) in f.coeffs().iter().enumerate() {
        let (k1, k2) = coarse.mode(idx);
        let j = fine.index_of(k1, k2).expect("fine grid contains the coarse lattice");
        out.coeffs_mut()[j] = c;
    }
    Ok(out)
}

/// [`linf_norm`] evaluated on a grid `factor` times finer (trigonometric
/// interpolation), which catches peaks between collocation nodes.
pub fn linf_norm_oversampled(f: &impl FieldComponents, factor: usize) -> Result<f64> {
    let fine = make_grid(f.grid().n() * factor.max(1))?;
    let refined: Vec<SpectralScalar> = f
        .scalars()
        .into_iter()
        .map(|c| refine(c, &fine))
        .collect::<Result<_>>()?;
    let refs: Vec<&SpectralScalar> = refined.iter().collect();
    let parts = real_parts(&fine, &refs)?;
    Ok(magnitudes(&parts).into_iter().fold(0.0, f64::max))
}

/// Mean-normalized `Lᵖ` norm on the nodes, `p ∈ [1, ∞]`.
pub fn lp_norm(f: &impl FieldComponents, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("integrability p = {p} must lie in [1, ∞]")));
    }
    let parts = real_parts(f.grid(), &f.scalars())?;
    let mags = magnitudes(&parts);
    if p.is_infinite() {
        return Ok(mags.into_iter().fold(0.0, f64::max));
    }
    let mean = mags.iter().map(|m| m.powf(p)).sum::<f64>() / mags.len() as f64;
    Ok(mean.powf(1.0 / p))
}

fn require_log_variant(config: &SystemConfig, allow: &[SystemVariant], expected: &'static str) -> Result<()> {
    if allow.contains(&config.variant()) {
        Ok(())
    } else {
        Err(Error::WrongVariant {
            expected,
            got: config.variant().name(),
        })
    }
}

/// `‖b‖_∞³ + ‖b‖_∞⁶ + ‖∇b‖³ + ‖v‖²`.
pub fn v_functional(state: &SimState, config: &SystemConfig) -> Result<f64> {
    require_log_variant(config, &[SystemVariant::Thm2, SystemVariant::Thm3], "thm2 or thm3")?;
    let b_inf = linf_norm(state.b())?;
    let grad_b = sobolev_norm(state.b(), 1.0)?;
    Ok(b_inf.powi(3) + b_inf.powi(6) + grad_b.powi(3) + state.v().norm_sq())
}

/// `‖L Λ^α v‖²`.
pub fn h_functional(state: &SimState, config: &SystemConfig) -> Result<f64> {
    require_log_variant(config, &[SystemVariant::Thm2], "thm2")?;
    let g = config.g().expect("thm2 carries g").clone();
    let spec = SymbolSpec::Composite(vec![
        SymbolSpec::FracPower(config.alpha()),
        SymbolSpec::LogWeight(g.clone()),
        SymbolSpec::LogWeight(g),
    ]);
    let table = crate::spectral::eval_symbol(&spec, state.grid())?;
    let mut sum = 0.0;
    for c in state.v().components() {
        sum += table.weighted_inner(c, c)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use num_complex::Complex64;

    #[test]
    fn sobolev_examples() {
        let g = make_grid(32).unwrap();
        let f = g.forward(&g.sample(|x, _| x.cos())).unwrap();
        let l2 = f.norm_sq().sqrt();
        assert!((sobolev_norm(&f, 0.5).unwrap() - l2).abs() < 1e-15);
        assert!((sobolev_norm(&f, 0.0).unwrap() - l2).abs() < 1e-15);
        let h = g.forward(&g.sample(|x, y| (2.0 * x + y).cos())).unwrap();
        let expect = 5f64.sqrt() * h.norm_sq().sqrt();
        assert!((sobolev_norm(&h, 1.0).unwrap() - expect).abs() < 1e-14);
        let c = g.forward(&vec![3.0; g.len()]).unwrap();
        assert_eq!(sobolev_norm(&c, 1.0).unwrap(), 0.0);
        assert!((sobolev_norm(&c, 0.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(sobolev_norm(&c, 12.5).is_err());
        assert!(sobolev_norm(&h, -1.0).unwrap() > 0.0);
    }

    #[test]
    fn linf_examples() {
        let g = make_grid(32).unwrap();
        let f = g.forward(&g.sample(|x, _| x.cos())).unwrap();
        assert!((linf_norm(&f).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(linf_norm(&SpectralScalar::zeros(&g)).unwrap(), 0.0);
        // |∇ sin(x+y)| peaks at √2
        let s = g.forward(&g.sample(|x, y| (x + y).sin())).unwrap();
        assert!((grad_linf(&s).unwrap() - 2f64.sqrt()).abs() < 1e-13);
        let m = SpectralScalar::single_mode(&g, 3, 1, Complex64::new(0.2, 0.1)).unwrap();
        assert!(linf_norm_oversampled(&m, 2).unwrap() >= linf_norm(&m).unwrap() - 1e-15);
    }
}
