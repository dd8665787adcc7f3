use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{SimState, SystemConfig};
use crate::error::{Error, Result};
use crate::fields::{self, SpectralVector};
use crate::spectral::{Grid, SpectralScalar};

use super::io::read_checkpoint_with;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `v = A(-sin x₂, sin x₁)`, `b = A(-sin(x₂+π/4), sin(x₁+π/4))`.
    TaylorGreenMhd { amplitude: f64 },
    /// Random stream functions on the shell `k_min ≤ |k| ≤ k_max`, with
    /// `‖v‖ = ‖b‖ = amplitude`.
    RandomBand {
        seed: u64,
        k_min: u32,
        k_max: u32,
        amplitude: f64,
    },
    /// `v = A(-sin x₂, sin x₁)`, `b = A(-sin x₂, sin 2x₁)`.
    OrszagTangLike { amplitude: f64 },
    FromCheckpoint(PathBuf),
}

impl InitialData {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialData::TaylorGreenMhd { .. } => "taylor_green_mhd",
            InitialData::RandomBand { .. } => "random_band",
            InitialData::OrszagTangLike { .. } => "orszag_tang_like",
            InitialData::FromCheckpoint(_) => "from_checkpoint",
        }
    }
}

/// Divergence-free field `∇⊥ψ` from a random stream function with Gaussian
/// coefficients on `k_min ≤ |k| ≤ k_max`, normalized to unit `L²` norm.
/// Modes are visited in a fixed order, so a seeded generator gives
/// bit-reproducible output.
pub fn random_solenoidal(grid: &Arc<Grid>, rng: &mut impl Rng, k_min: usize, k_max: usize) -> Result<SpectralVector> {
    let cutoff = grid.dealias_cutoff() as usize;
    if k_max > cutoff || k_min > k_max || k_min == 0 {
        return Err(Error::Domain(format!(
            "band [{k_min}, {k_max}] must satisfy 1 ≤ k_min ≤ k_max ≤ {cutoff} (dealias cutoff)"
        )));
    }
    let (lo, hi) = ((k_min * k_min) as f64, (k_max * k_max) as f64);
    let mut psi = SpectralScalar::zeros(grid);
    for idx in 0..grid.len() {
        let neg = grid.neg_index(idx);
        if neg < idx {
            continue;
        }
        let q = grid.k_sq()[idx];
        if q < lo || q > hi || neg == idx {
            continue;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        // |k|^{-1} keeps the velocity spectrum flat across the band
        let c = Complex64::new(re, im) / q.sqrt();
        psi.coeffs_mut()[idx] = c;
        psi.coeffs_mut()[neg] = c.conj();
    }
    let v = fields::perp_gradient(&psi);
    let norm = v.norm_sq().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain(format!("band [{k_min}, {k_max}] contains no lattice modes")));
    }
    Ok(v.scaled(1.0 / norm))
}

fn sampled(grid: &Arc<Grid>, f1: impl Fn(f64, f64) -> f64, f2: impl Fn(f64, f64) -> f64) -> Result<SpectralVector> {
    let mut v = SpectralVector::from_fn(grid, f1, f2)?;
    v.dealias_in_place();
    Ok(fields::leray_project(&v))
}

/// Builds the initial state; all families are solenoidal, dealiased and
/// Hermitian. Checkpoints must match the grid and the system.
pub fn make_initial_data(data: &InitialData, grid: &Arc<Grid>, config: &SystemConfig) -> Result<SimState> {
    let (v, b) = match *data {
        InitialData::TaylorGreenMhd { amplitude: a } => (
            sampled(grid, |_, y| -a * y.sin(), |x, _| a * x.sin())?,
            sampled(grid, |_, y| -a * (y + FRAC_PI_4).sin(), |x, _| a * (x + FRAC_PI_4).sin())?,
        ),
        InitialData::OrszagTangLike { amplitude: a } => (
            sampled(grid, |_, y| -a * y.sin(), |x, _| a * x.sin())?,
            sampled(grid, |_, y| -a * y.sin(), |x, _| a * (2.0 * x).sin())?,
        ),
        InitialData::RandomBand {
            seed,
            k_min,
            k_max,
            amplitude,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_solenoidal(grid, &mut rng, k_min as usize, k_max as usize)?;
            let b = random_solenoidal(grid, &mut rng, k_min as usize, k_max as usize)?;
            (v.scaled(amplitude), b.scaled(amplitude))
        }
        InitialData::FromCheckpoint(ref path) => {
            let state = read_checkpoint_with(path, config)?;
            grid.same_as(state.grid())?;
            return Ok(state);
        }
    };
    let mut v = v;
    let mut b = b;
    for f in [&mut v, &mut b] {
        f.enforce_hermitian();
        f.dealias_in_place();
    }
    SimState::new(v, b, 0.0, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn taylor_green_norm_by_quadrature() {
        let grid = make_grid(32).unwrap();
        let config = SystemConfig::thm1(0.8, 0.5).unwrap();
        let s = make_initial_data(&InitialData::TaylorGreenMhd { amplitude: 1.0 }, &grid, &config).unwrap();
        // mean of sin²x₂ + sin²x₁ over the torus
        let pts = grid.sample(|x, y| y.sin().powi(2) + x.sin().powi(2));
        let mean = pts.iter().sum::<f64>() / pts.len() as f64;
        assert!((s.v().norm_sq() - mean).abs() < 1e-14);
        assert!((mean - 1.0).abs() < 1e-14);
        assert!(s.v().divergence_defect() < 1e-15 && s.b().divergence_defect() < 1e-15);
    }

    #[test]
    fn random_band_is_reproducible() {
        let grid = make_grid(32).unwrap();
        let config = SystemConfig::appendix_a(0.6).unwrap();
        let data = InitialData::RandomBand {
            seed: 7,
            k_min: 2,
            k_max: 6,
            amplitude: 0.5,
        };
        let a = make_initial_data(&data, &grid, &config).unwrap();
        let b = make_initial_data(&data, &grid, &config).unwrap();
        assert_eq!(a.v().x().coeffs(), b.v().x().coeffs());
        assert_eq!(a.b().y().coeffs(), b.b().y().coeffs());
        assert!((a.v().norm_sq().sqrt() - 0.5).abs() < 1e-15);
        assert_eq!(a.v().x().hermitian_defect(), 0.0);
        let bad = InitialData::RandomBand {
            seed: 7,
            k_min: 2,
            k_max: 11,
            amplitude: 0.5,
        };
        assert!(make_initial_data(&bad, &grid, &config).is_err());
    }
}
