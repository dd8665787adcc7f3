use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::grid::Grid;

/// A real scalar field stored as its Fourier coefficients on a [`Grid`].
#[derive(Clone, Debug)]
pub struct SpectralScalar {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralScalar {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Real field `amp·e^{ik·x} + conj(amp)·e^{-ik·x}`.
    pub fn single_mode(grid: &Arc<Grid>, k1: i64, k2: i64, amp: Complex64) -> Result<Self> {
        let mut out = Self::zeros(grid);
        let idx = grid
            .index_of(k1, k2)
            .ok_or_else(|| Error::Domain(format!("mode ({k1}, {k2}) is not on the lattice")))?;
        let neg = grid.neg_index(idx);
        if idx == neg {
            out.coeffs[idx] = Complex64::new(2.0 * amp.re, 0.0);
        } else {
            out.coeffs[idx] = amp;
            out.coeffs[neg] = amp.conj();
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the mode `(k₁, k₂)`; zero off the lattice.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.grid
            .index_of(k1, k2)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn check_grid(&self, other: &SpectralScalar) -> Result<()> {
        self.grid.same_as(&other.grid)
    }

    /// Applies `f(index, coefficient)` to every mode.
    pub fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map_modes(|_, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.map_modes(|i, c| c + other.coeffs[i]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.map_modes(|i, c| c - other.coeffs[i]))
    }

    /// `self += a·x`
    pub fn axpy(&mut self, a: f64, x: &Self) -> Result<()> {
        self.check_grid(x)?;
        for (y, &xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += xv * a;
        }
        Ok(())
    }

    /// Real part of `Σ conj(self(k))·other(k)`: the mean of `f·g` over the torus.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum())
    }

    /// `Σ |f̂(k)|²`, equal to the mean of `f²` over the torus.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest deviation from `f̂(-k) = conj(f̂(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.neg_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Projects onto real fields: `f̂(k) ← (f̂(k) + conj f̂(-k)) / 2`.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid.clone();
        for i in 0..self.coeffs.len() {
            let j = grid.neg_index(i);
            if j < i {
                continue;
            }
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
    }

    pub fn to_real(&self) -> Result<Vec<f64>> {
        self.grid.backward(self)
    }
}
