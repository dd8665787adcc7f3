//! Periodic grid on the 2π-torus and its 2D Fourier transforms.
//!
//! Storage is row-major over `(i1, i2)`, where `i1` indexes the `x₁`
//! direction (and the `k₁` wavenumber) and `i2` indexes `x₂` / `k₂`.
//! Wavenumbers follow FFT order: `0, 1, .., n/2-1, -n/2, .., -1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spectral::field::SpectralScalar;

pub const MIN_POINTS: usize = 16;
pub const MAX_POINTS: usize = 4096;

pub struct Grid {
    n: usize,
    cutoff: i64,
    wavenumbers: Vec<i64>,
    // derivative wavenumbers: identical to `wavenumbers` except the Nyquist
    // entry, which is zero so that derivatives of real fields stay real
    deriv: Vec<f64>,
    k_sq: Vec<f64>,
    mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

/// Builds the `n × n` grid on `[0, 2π)²`.
///
/// The dealias mask keeps modes with `max(|k₁|, |k₂|) ≤ K` where `K` is the
/// largest integer with `3K < n`. For `n` not divisible by three this is
/// `floor(n/3)`; when `3 | n` the edge shell `n/3` is dropped because it
/// would receive aliased energy from quadratic products.
pub fn make_grid(n: usize) -> Result<Arc<Grid>> {
    if !n.is_multiple_of(2) || !(MIN_POINTS..=MAX_POINTS).contains(&n) {
        return Err(Error::Config(format!(
            "grid size must be even and within [{MIN_POINTS}, {MAX_POINTS}], got {n}"
        )));
    }
    let half = (n / 2) as i64;
    let wavenumbers: Vec<i64> = (0..n as i64)
        .map(|i| if i < half { i } else { i - n as i64 })
        .collect();
    let deriv = wavenumbers
        .iter()
        .map(|&k| if k == -half { 0.0 } else { k as f64 })
        .collect();
    let cutoff = (n as i64 - 1) / 3;

    let mut k_sq = Vec::with_capacity(n * n);
    let mut mask = Vec::with_capacity(n * n);
    for &k1 in &wavenumbers {
        for &k2 in &wavenumbers {
            k_sq.push((k1 * k1 + k2 * k2) as f64);
            mask.push(k1.abs().max(k2.abs()) <= cutoff);
        }
    }

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    Ok(Arc::new(Grid {
        n,
        cutoff,
        wavenumbers,
        deriv,
        k_sq,
        mask,
        forward,
        inverse,
    }))
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest retained `|kᵢ|` under the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Real-space node coordinate `2π i / n`.
    pub fn node(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n as f64
    }

    pub fn wavenumber(&self, axis_index: usize) -> i64 {
        self.wavenumbers[axis_index]
    }

    /// `(k₁, k₂)` of a flat mode index.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (self.wavenumbers[idx / self.n], self.wavenumbers[idx % self.n])
    }

    /// Derivative wavenumbers `(k₁, k₂)` of a flat mode index (Nyquist → 0).
    pub fn deriv_mode(&self, idx: usize) -> (f64, f64) {
        (self.deriv[idx / self.n], self.deriv[idx % self.n])
    }

    pub fn k_sq(&self) -> &[f64] {
        &self.k_sq
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Flat index of the mode `(k₁, k₂)`, if it lies on the lattice.
    pub fn index_of(&self, k1: i64, k2: i64) -> Option<usize> {
        let n = self.n as i64;
        let half = n / 2;
        let axis = |k: i64| -> Option<usize> {
            if (-half..half).contains(&k) {
                Some(k.rem_euclid(n) as usize)
            } else {
                None
            }
        };
        Some(axis(k1)? * self.n + axis(k2)?)
    }

    /// Flat index of `-k` (wrapping the Nyquist entries onto themselves).
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (i1, i2) = (idx / n, idx % n);
        ((n - i1) % n) * n + (n - i2) % n
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got == self.len() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.len(),
                got,
            })
        }
    }

    // Unnormalized 2D transform in place: rows, transpose, rows, transpose.
    fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.n;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut transposed = vec![Complex64::default(); n * n];
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, &mut transposed, n);
        plan.process_with_scratch(&mut transposed, &mut scratch);
        transpose(&transposed, data, n);
    }

    /// Forward transform with the `1/n²` factor: the coefficients are the
    /// Fourier-series amplitudes of the sampled function. The output is
    /// exactly Hermitian.
    pub fn forward(self: &Arc<Self>, values: &[f64]) -> Result<SpectralScalar> {
        self.check_len(values.len())?;
        let mut data: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft2(&mut data, false);
        let scale = 1.0 / self.len() as f64;
        let coeffs = (0..data.len())
            .map(|i| {
                let j = self.neg_index(i);
                (data[i] + data[j].conj()) * (0.5 * scale)
            })
            .collect();
        SpectralScalar::from_coeffs(self.clone(), coeffs)
    }

    /// Forward transform of two real fields through one complex FFT.
    pub fn forward_pair(
        self: &Arc<Self>,
        first: &[f64],
        second: &[f64],
    ) -> Result<(SpectralScalar, SpectralScalar)> {
        self.check_len(first.len())?;
        self.check_len(second.len())?;
        let mut data: Vec<Complex64> = first
            .iter()
            .zip(second)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        self.fft2(&mut data, false);
        let half_scale = 0.5 / self.len() as f64;
        let mut a = Vec::with_capacity(data.len());
        let mut b = Vec::with_capacity(data.len());
        for i in 0..data.len() {
            let z = data[i];
            let zc = data[self.neg_index(i)].conj();
            a.push((z + zc) * half_scale);
            // (z - zc) / (2i)
            let d = (z - zc) * half_scale;
            b.push(Complex64::new(d.im, -d.re));
        }
        Ok((
            SpectralScalar::from_coeffs(self.clone(), a)?,
            SpectralScalar::from_coeffs(self.clone(), b)?,
        ))
    }

    /// Backward transform: samples `f(x) = Σ_k f̂(k) e^{ik·x}` on the nodes.
    /// The imaginary part is discarded (it vanishes for Hermitian input).
    pub fn backward(&self, field: &SpectralScalar) -> Result<Vec<f64>> {
        self.same_as(field.grid())?;
        let mut data = field.coeffs().to_vec();
        self.fft2(&mut data, true);
        Ok(data.into_iter().map(|z| z.re).collect())
    }

    /// Backward transform of two Hermitian spectra through one complex FFT.
    pub fn backward_pair(
        &self,
        first: &SpectralScalar,
        second: &SpectralScalar,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.same_as(first.grid())?;
        self.same_as(second.grid())?;
        let i = Complex64::i();
        let mut data: Vec<Complex64> = first
            .coeffs()
            .iter()
            .zip(second.coeffs())
            .map(|(&a, &b)| a + i * b)
            .collect();
        self.fft2(&mut data, true);
        Ok(data.into_iter().map(|z| (z.re, z.im)).unzip())
    }

    /// Backward transform of a batch of Hermitian spectra, paired two at a time.
    pub fn backward_many(&self, fields: &[&SpectralScalar]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(fields.len());
        for chunk in fields.chunks(2) {
            match chunk {
                [a, b] => {
                    let (fa, fb) = self.backward_pair(a, b)?;
                    out.push(fa);
                    out.push(fb);
                }
                [a] => out.push(self.backward(a)?),
                _ => unreachable!(),
            }
        }
        Ok(out)
    }

    /// Real-space samples of a function of the node coordinates.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for i1 in 0..self.n {
            let x1 = self.node(i1);
            for i2 in 0..self.n {
                out.push(f(x1, self.node(i2)));
            }
        }
        out
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_sizes() {
        let g = make_grid(16).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.dealias_cutoff(), 5);
        assert_eq!(make_grid(64).unwrap().dealias_cutoff(), 21);
        assert!(make_grid(15).is_err());
        assert!(make_grid(8).is_err());
        assert!(make_grid(4098).is_err());
    }

    #[test]
    fn cutoff_avoids_alias_when_n_divisible_by_three() {
        let g = make_grid(48).unwrap();
        assert_eq!(g.dealias_cutoff(), 15);
        assert!(3 * g.dealias_cutoff() < 48);
    }

    #[test]
    fn zero_mode_and_mask() {
        let g = make_grid(16).unwrap();
        let zeros = (0..g.len()).filter(|&i| g.mode(i) == (0, 0)).count();
        assert_eq!(zeros, 1);
        for i in 0..g.len() {
            let (k1, k2) = g.mode(i);
            assert_eq!(g.mask()[i], k1.abs().max(k2.abs()) <= 5);
            if k1 != -8 && k2 != -8 {
                assert_eq!(g.mode(g.neg_index(i)), (-k1, -k2));
            }
        }
    }

    #[test]
    fn constant_and_cosine() {
        let g = make_grid(16).unwrap();
        let f = g.forward(&vec![1.0; g.len()]).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            let expect = if i == 0 { 1.0 } else { 0.0 };
            assert!((c.re - expect).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
        let f = g.forward(&g.sample(|x1, _| x1.cos())).unwrap();
        let p = g.index_of(1, 0).unwrap();
        let m = g.index_of(-1, 0).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            if i == p || i == m {
                assert!((c.re - 0.5).abs() < 1e-15 && c.im.abs() < 1e-15);
            } else {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn roundtrip_and_pairs() {
        let g = make_grid(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (fa, fb) = g.forward_pair(&a, &b).unwrap();
        let fa1 = g.forward(&a).unwrap();
        for (x, y) in fa.coeffs().iter().zip(fa1.coeffs()) {
            assert!((x - y).norm() < 1e-15);
        }
        let (ra, rb) = g.backward_pair(&fa, &fb).unwrap();
        let scale = a.iter().chain(&b).fold(0.0_f64, |m, x| m.max(x.abs()));
        for i in 0..g.len() {
            assert!((ra[i] - a[i]).abs() <= 1e-13 * scale);
            assert!((rb[i] - b[i]).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = make_grid(16).unwrap();
        assert!(matches!(
            g.forward(&[0.0; 10]),
            Err(Error::Dimension { expected: 256, got: 10 })
        ));
    }
}
