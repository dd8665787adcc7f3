//! Dyadic Littlewood–Paley decomposition on the lattice.
//!
//! `χ` equals 1 on `|ξ| ≤ 3/4` and vanishes for `|ξ| ≥ 4/3`, with a `C^∞`
//! transition. `φ(ξ) = χ(ξ/2) - χ(ξ)` is supported in `3/4 ≤ |ξ| ≤ 8/3`, and
//! `Δ₋₁ = χ(D)`, `Δⱼ = φ(2^{-j}D)` for `j ≥ 0`.

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralScalar};

use super::norms::lp_norm;

pub const INNER_RADIUS: f64 = 3.0 / 4.0;
pub const OUTER_RADIUS: f64 = 4.0 / 3.0;

/// `e^{-1/t}` for `t > 0`, else 0.
fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step from 0 (t ≤ 0) to 1 (t ≥ 1).
fn smooth_step(t: f64) -> f64 {
    let a = psi(t);
    let b = psi(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Low-frequency cutoff `χ(r)`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS))
}

/// Annulus profile `φ(r) = χ(r/2) - χ(r)`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Weight of block `j` at radius `r`.
pub fn block_weight(j: i32, r: f64) -> f64 {
    if j < 0 {
        chi(r)
    } else {
        phi(r / 2f64.powi(j))
    }
}

/// Support of block `j` as `(r_min, r_max)`.
pub fn block_support(j: i32) -> (f64, f64) {
    if j < 0 {
        (0.0, OUTER_RADIUS)
    } else {
        let s = 2f64.powi(j);
        (INNER_RADIUS * s, 8.0 / 3.0 * s)
    }
}

/// Smallest `j_max` for which the blocks `-1..=j_max` cover every lattice mode.
pub fn required_j_max(grid: &Grid) -> i32 {
    let r_max = grid.k_sq().iter().cloned().fold(0.0, f64::max).sqrt();
    // χ(2^{-(J+1)} r) = 1 needs 2^{-(J+1)} r ≤ 3/4
    let mut j = -1;
    while r_max / 2f64.powi(j + 1) > INNER_RADIUS {
        j += 1;
    }
    j
}

#[derive(Clone, Debug)]
pub struct DyadicBlock {
    pub index: i32,
    pub field: SpectralScalar,
}

/// Splits `f` into blocks `j = -1..=j_max`. With `None` the smallest
/// covering `j_max` is used; a smaller explicit value is an error because
/// the blocks would no longer sum to `f`.
pub fn lp_decompose(f: &SpectralScalar, j_max: Option<i32>) -> Result<Vec<DyadicBlock>> {
    let grid = f.grid();
    let needed = required_j_max(grid);
    let j_max = j_max.unwrap_or(needed);
    if j_max < needed {
        return Err(Error::Domain(format!(
            "j_max = {j_max} leaves lattice modes uncovered (need at least {needed})"
        )));
    }
    let radii: Vec<f64> = grid.k_sq().iter().map(|q| q.sqrt()).collect();
    Ok((-1..=j_max)
        .map(|j| DyadicBlock {
            index: j,
            field: f.map_modes(|i, c| c * block_weight(j, radii[i])),
        })
        .collect())
}

/// `Σⱼ Δⱼf`.
pub fn lp_reconstruct(blocks: &[DyadicBlock]) -> Result<SpectralScalar> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Domain("no blocks to reconstruct".into()))?;
    let mut out = SpectralScalar::zeros(first.field.grid());
    for b in blocks {
        out.axpy(1.0, &b.field)?;
    }
    Ok(out)
}

/// `L²` norm of every block, indexed from `j = -1`.
pub fn lp_spectrum(f: &SpectralScalar) -> Result<Vec<f64>> {
    Ok(lp_decompose(f, None)?
        .iter()
        .map(|b| b.field.norm_sq().sqrt())
        .collect())
}

/// `B^s_{p,r}` norm: the `ℓʳ` norm over `j` of `2^{js}‖Δⱼf‖_{Lᵖ}`.
pub fn besov_norm(f: &SpectralScalar, s: f64, p: f64, r: f64) -> Result<f64> {
    for (name, x) in [("p", p), ("r", r)] {
        if !(x >= 1.0) {
            return Err(Error::Domain(format!("{name} = {x} must lie in [1, ∞]")));
        }
    }
    let terms: Vec<f64> = lp_decompose(f, None)?
        .iter()
        .map(|b| Ok(2f64.powf(b.index as f64 * s) * lp_norm(&b.field, p)?))
        .collect::<Result<_>>()?;
    Ok(if r.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    })
}

/// Measured Bernstein ratios of one block against their brackets.
#[derive(Clone, Debug)]
pub struct BernsteinReport {
    pub j: i32,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    /// `‖Λ^k h‖_{L^b} / (2^{jk + 2j(1/a-1/b)} ‖h‖_{L^a})`
    pub upper_ratio: f64,
    pub upper_bracket: f64,
    /// `‖Λ^k h‖_{L²} / (2^{jk} ‖h‖_{L²})`; only for `a = b = 2` and `j ≥ 0`.
    pub lower_ratio: Option<f64>,
    pub lower_bracket: Option<f64>,
}

impl BernsteinReport {
    pub fn holds(&self) -> bool {
        const SLACK: f64 = 1e-12;
        let upper = self.upper_ratio <= self.upper_bracket * (1.0 + SLACK);
        let lower = match (self.lower_ratio, self.lower_bracket) {
            (Some(r), Some(b)) => r >= b * (1.0 - SLACK),
            _ => true,
        };
        upper && lower
    }
}

/// Checks Bernstein's inequalities on a field supported in block `j`.
///
/// Brackets follow from the block support `|ξ| ≤ (8/3)·2^j` (`4/3` for the
/// low block) and from the lattice count `N` of that support: for
/// `1 ≤ a ≤ 2 ≤ b`, `‖h‖_{L^b} ≤ N^{1/a-1/b}‖h‖_{L^a}` on `N`-term
/// trigonometric polynomials with mean-normalized norms.
pub fn bernstein_check(f: &SpectralScalar, j: i32, k: f64, a: f64, b: f64) -> Result<BernsteinReport> {
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("derivative order k = {k} must be non-negative")));
    }
    if !(1.0..=2.0).contains(&a) || !(b >= 2.0) {
        return Err(Error::Domain(format!(
            "brackets are available for 1 ≤ a ≤ 2 ≤ b (got a = {a}, b = {b})"
        )));
    }
    let grid = f.grid();
    let (r_lo, r_hi) = block_support(j);
    let mut lattice_count = 0usize;
    for (i, (&q, c)) in grid.k_sq().iter().zip(f.coeffs()).enumerate() {
        let r = q.sqrt();
        let inside = r >= r_lo && r <= r_hi;
        if inside {
            lattice_count += 1;
        } else if c.norm() > 0.0 {
            let (k1, k2) = grid.mode(i);
            return Err(Error::Domain(format!(
                "mode ({k1}, {k2}) lies outside block {j}"
            )));
        }
    }
    let derived = f.map_modes(|i, c| c * grid.k_sq()[i].powf(k / 2.0));
    let scale = 2f64.powf(j as f64 * k);
    let inv_ab = 1.0 / a - if b.is_infinite() { 0.0 } else { 1.0 / b };
    let base = lp_norm(f, a)?;
    let upper_ratio = if base == 0.0 {
        0.0
    } else {
        lp_norm(&derived, b)? / (scale * 2f64.powf(2.0 * j as f64 * inv_ab) * base)
    };
    let top = if j < 0 { OUTER_RADIUS * 2.0 } else { 8.0 / 3.0 };
    let upper_bracket = top.powf(k) * (lattice_count as f64).powf(inv_ab) / 2f64.powf(2.0 * j as f64 * inv_ab);
    let (lower_ratio, lower_bracket) = if a == 2.0 && b == 2.0 && j >= 0 {
        let l2 = f.norm_sq().sqrt();
        let r = if l2 == 0.0 {
            0.0
        } else {
            derived.norm_sq().sqrt() / (scale * l2)
        };
        (Some(r), Some(INNER_RADIUS.powf(k)))
    } else {
        (None, None)
    };
    Ok(BernsteinReport {
        j,
        k,
        a,
        b,
        upper_ratio,
        upper_bracket,
        lower_ratio,
        lower_bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use num_complex::Complex64;

    #[test]
    fn profile_supports() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert!(chi(1.0) > 0.0 && chi(1.0) < 1.0);
        assert_eq!(phi(0.7), 0.0);
        assert_eq!(phi(2.7), 0.0);
        for r in [0.0, 0.3, 0.8, 1.1, 2.0, 5.0, 33.3] {
            let total: f64 = (-1..8).map(|j| block_weight(j, r)).sum();
            assert!((total - 1.0).abs() < 1e-15, "{r}: {total}");
        }
    }

    #[test]
    fn single_mode_lands_in_its_blocks() {
        let g = make_grid(64).unwrap();
        let f = SpectralScalar::single_mode(&g, 8, 0, Complex64::new(1.0, 0.0)).unwrap();
        let spec = lp_spectrum(&f).unwrap();
        // |k| = 8 = 2³: φ(8/2³) = φ(1) and φ(8/2²) = φ(2)
        let idx = |j: i32| (j + 1) as usize;
        let dominant = spec[idx(3)];
        assert!(dominant > 0.0);
        for (i, &s) in spec.iter().enumerate() {
            let j = i as i32 - 1;
            if j != 2 && j != 3 {
                assert_eq!(s, 0.0, "block {j}");
            }
        }
        assert!(besov_norm(&f, 0.0, 2.0, 0.5).is_err());
        let r = bernstein_check(&f, 3, 1.5, 2.0, 2.0).unwrap();
        assert!((r.upper_ratio - 1.0).abs() < 1e-14 && r.holds());
        assert!(bernstein_check(&f, 1, 1.0, 2.0, 2.0).is_err());
    }
}
