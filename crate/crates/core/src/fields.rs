//! Two-component fields on the torus and the differential operators acting
//! on them: Leray projection, gradients, vorticity and Biot–Savart inversion.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, MultiplierTable, SpectralScalar};

#[derive(Clone, Debug)]
pub struct SpectralVector {
    components: [SpectralScalar; 2],
}

/// Scalar vorticity `ω = ∂₁v₂ - ∂₂v₁`.
#[derive(Clone, Debug)]
pub struct Vorticity(pub SpectralScalar);

impl SpectralVector {
    pub fn new(first: SpectralScalar, second: SpectralScalar) -> Result<Self> {
        first.check_grid(&second)?;
        Ok(Self {
            components: [first, second],
        })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            components: [SpectralScalar::zeros(grid), SpectralScalar::zeros(grid)],
        }
    }

    /// Samples both components from real-space functions.
    pub fn from_fn(
        grid: &Arc<Grid>,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let (a, b) = grid.forward_pair(&grid.sample(f1), &grid.sample(f2))?;
        Self::new(a, b)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn x(&self) -> &SpectralScalar {
        &self.components[0]
    }

    pub fn y(&self) -> &SpectralScalar {
        &self.components[1]
    }

    pub fn components(&self) -> &[SpectralScalar; 2] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralScalar; 2] {
        &mut self.components
    }

    pub fn into_components(self) -> [SpectralScalar; 2] {
        self.components
    }

    pub fn map(&self, f: impl Fn(&SpectralScalar) -> SpectralScalar) -> Self {
        Self {
            components: [f(&self.components[0]), f(&self.components[1])],
        }
    }

    pub fn try_map(&self, f: impl Fn(&SpectralScalar) -> Result<SpectralScalar>) -> Result<Self> {
        Ok(Self {
            components: [f(&self.components[0])?, f(&self.components[1])?],
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|c| c.scaled(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.components[0].add(&other.components[0])?,
            self.components[1].add(&other.components[1])?,
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.components[0].sub(&other.components[0])?,
            self.components[1].sub(&other.components[1])?,
        )
    }

    pub fn axpy(&mut self, a: f64, x: &Self) -> Result<()> {
        self.components[0].axpy(a, &x.components[0])?;
        self.components[1].axpy(a, &x.components[1])
    }

    /// Mean over the torus of `f·g`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        Ok(self.components[0].inner(&other.components[0])?
            + self.components[1].inner(&other.components[1])?)
    }

    pub fn norm_sq(&self) -> f64 {
        self.components[0].norm_sq() + self.components[1].norm_sq()
    }

    pub fn apply(&self, table: &MultiplierTable) -> Result<Self> {
        self.try_map(|c| table.apply(c))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(SpectralScalar::is_finite)
    }

    pub fn enforce_hermitian(&mut self) {
        self.components.iter_mut().for_each(SpectralScalar::enforce_hermitian);
    }

    pub fn dealias_in_place(&mut self) {
        self.components
            .iter_mut()
            .for_each(crate::spectral::dealias_in_place);
    }

    /// Largest `|k·f̂(k)| / |k|` relative to the largest `|f̂(k)|`.
    pub fn divergence_defect(&self) -> f64 {
        let grid = self.grid();
        let scale = self.components[0]
            .max_abs_coeff()
            .max(self.components[1].max_abs_coeff());
        if scale == 0.0 {
            return 0.0;
        }
        let (a, b) = (self.x().coeffs(), self.y().coeffs());
        let mut worst = 0.0_f64;
        for idx in 0..grid.len() {
            let (k1, k2) = grid.deriv_mode(idx);
            let k = (k1 * k1 + k2 * k2).sqrt();
            if k > 0.0 {
                worst = worst.max((a[idx] * k1 + b[idx] * k2).norm() / k);
            }
        }
        worst / scale
    }
}

/// Orthogonal projection onto divergence-free fields, `f̂ - k (k·f̂)/|k|²`.
/// The mean passes through unchanged.
pub fn leray_project(f: &SpectralVector) -> SpectralVector {
    let grid = f.grid().clone();
    let (a, b) = (f.x().coeffs(), f.y().coeffs());
    let mut pa = Vec::with_capacity(grid.len());
    let mut pb = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let (k1, k2) = grid.deriv_mode(idx);
        let k_sq = k1 * k1 + k2 * k2;
        if k_sq == 0.0 {
            pa.push(a[idx]);
            pb.push(b[idx]);
        } else {
            let dot = (a[idx] * k1 + b[idx] * k2) / k_sq;
            pa.push(a[idx] - dot * k1);
            pb.push(b[idx] - dot * k2);
        }
    }
    SpectralVector {
        components: [
            SpectralScalar::from_coeffs(grid.clone(), pa).expect("grid-sized"),
            SpectralScalar::from_coeffs(grid, pb).expect("grid-sized"),
        ],
    }
}

/// `∂ₐ s` for axis 0 (`x₁`) or 1 (`x₂`), by multiplication with `i kₐ`.
pub fn partial(s: &SpectralScalar, axis: usize) -> SpectralScalar {
    let grid = s.grid().clone();
    s.map_modes(|idx, c| {
        let (k1, k2) = grid.deriv_mode(idx);
        let k = if axis == 0 { k1 } else { k2 };
        Complex64::new(-c.im * k, c.re * k)
    })
}

pub fn divergence(f: &SpectralVector) -> SpectralScalar {
    let grid = f.grid().clone();
    let (a, b) = (f.x().coeffs(), f.y().coeffs());
    let coeffs = (0..grid.len())
        .map(|idx| {
            let (k1, k2) = grid.deriv_mode(idx);
            (a[idx] * k1 + b[idx] * k2) * Complex64::i()
        })
        .collect();
    SpectralScalar::from_coeffs(grid, coeffs).expect("grid-sized")
}

pub fn gradient(s: &SpectralScalar) -> SpectralVector {
    SpectralVector {
        components: [partial(s, 0), partial(s, 1)],
    }
}

/// `∇⊥s = (-∂₂s, ∂₁s)`.
pub fn perp_gradient(s: &SpectralScalar) -> SpectralVector {
    SpectralVector {
        components: [partial(s, 1).scaled(-1.0), partial(s, 0)],
    }
}

pub fn laplacian(s: &SpectralScalar) -> SpectralScalar {
    let grid = s.grid().clone();
    s.map_modes(|idx, c| {
        let (k1, k2) = grid.deriv_mode(idx);
        -c * (k1 * k1 + k2 * k2)
    })
}

/// Scalar curl `∇⊥·f = ∂₁f₂ - ∂₂f₁`.
pub fn curl(f: &SpectralVector) -> SpectralScalar {
    let grid = f.grid().clone();
    let (a, b) = (f.x().coeffs(), f.y().coeffs());
    let coeffs = (0..grid.len())
        .map(|idx| {
            let (k1, k2) = grid.deriv_mode(idx);
            (b[idx] * k1 - a[idx] * k2) * Complex64::i()
        })
        .collect();
    SpectralScalar::from_coeffs(grid, coeffs).expect("grid-sized")
}

pub fn vorticity_of(v: &SpectralVector) -> Vorticity {
    if log::log_enabled!(log::Level::Warn) {
        let defect = v.divergence_defect();
        if defect > 1e-10 {
            log::warn!("vorticity of a field with divergence defect {defect:.3e}");
        }
    }
    Vorticity(curl(v))
}

/// Biot–Savart inversion: the divergence-free, zero-mean `v` with
/// `∇⊥·v = ω`, i.e. `v̂ = i(k₂, -k₁) ω̂ / |k|²`.
pub fn velocity_from_vorticity(omega: &Vorticity) -> Result<SpectralVector> {
    let w = &omega.0;
    let mean = w.coeffs()[0].norm();
    let scale = w.norm_sq().sqrt();
    if mean > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Inversion(format!(
            "vorticity has nonzero mean {mean:.3e}"
        )));
    }
    let grid = w.grid().clone();
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for (idx, &c) in w.coeffs().iter().enumerate() {
        let (k1, k2) = grid.deriv_mode(idx);
        let k_sq = k1 * k1 + k2 * k2;
        if k_sq == 0.0 {
            a.push(Complex64::default());
            b.push(Complex64::default());
        } else {
            let ic = Complex64::new(-c.im, c.re) / k_sq;
            a.push(ic * k2);
            b.push(-ic * k1);
        }
    }
    SpectralVector::new(
        SpectralScalar::from_coeffs(grid.clone(), a)?,
        SpectralScalar::from_coeffs(grid, b)?,
    )
}
