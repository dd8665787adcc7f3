use crate::dynamics::SimState;
use crate::error::Result;
use crate::fields::{self, SpectralVector};
use crate::spectral::SpectralScalar;

/// Normalized residuals of the three trilinear cancellations
///
/// ```text
/// r1: ∫(b·∇b)·u + ∫(b·∇u)·b = 0
/// r2: ∫(u·∇v)·u + ∫(Σⱼ vⱼ∇uⱼ)·u = 0
/// r3: ∫(u·∇w)·u = 0,   w = u - Δu
/// ```
///
/// Each residual is the absolute sum divided by the sum of the mean absolute
/// integrands, so it is dimensionless and at round-off level when the
/// identity holds.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CancellationResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl CancellationResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }
}

pub fn cancellation_residuals(state: &SimState) -> Result<CancellationResiduals> {
    cancellation_residuals_raw(state.u(), state.v(), state.b())
}

struct Real {
    f: [Vec<f64>; 2],
    // d[i][j] = ∂ⱼfᵢ
    d: [[Vec<f64>; 2]; 2],
}

fn real_with_jacobian(f: &SpectralVector) -> Result<Real> {
    let mut spec: Vec<SpectralScalar> = f.components().to_vec();
    for c in f.components() {
        spec.push(fields::partial(c, 0));
        spec.push(fields::partial(c, 1));
    }
    let refs: Vec<&SpectralScalar> = spec.iter().collect();
    let mut it = f.grid().backward_many(&refs)?.into_iter();
    let mut next = || it.next().expect("six fields");
    let fr = [next(), next()];
    let d = [[next(), next()], [next(), next()]];
    Ok(Real { f: fr, d })
}

/// Mean of `(a·∇)c · e`.
fn advective(a: &Real, c: &Real, e: &Real, p: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        s += (a.f[0][p] * c.d[i][0][p] + a.f[1][p] * c.d[i][1][p]) * e.f[i][p];
    }
    s
}

fn ratio(total: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        total.abs() / scale
    }
}

/// [`cancellation_residuals`] for arbitrary fields. The identities need
/// `∇·u = ∇·b = 0`; injecting divergence makes r1 and r2 depart from zero.
pub fn cancellation_residuals_raw(
    u: &SpectralVector,
    v: &SpectralVector,
    b: &SpectralVector,
) -> Result<CancellationResiduals> {
    let w = u.sub(&u.map(fields::laplacian))?;
    let (ur, vr, br, wr) = (
        real_with_jacobian(u)?,
        real_with_jacobian(v)?,
        real_with_jacobian(b)?,
        real_with_jacobian(&w)?,
    );
    let n = ur.f[0].len();
    let mut sums = [0.0; 5];
    let mut abs = [0.0; 5];
    for p in 0..n {
        let terms = [
            advective(&br, &br, &ur, p),
            advective(&br, &ur, &br, p),
            advective(&ur, &vr, &ur, p),
            // Σᵢ Σⱼ vⱼ ∂ᵢuⱼ uᵢ
            (0..2)
                .map(|i| (vr.f[0][p] * ur.d[0][i][p] + vr.f[1][p] * ur.d[1][i][p]) * ur.f[i][p])
                .sum(),
            advective(&ur, &wr, &ur, p),
        ];
        for k in 0..5 {
            sums[k] += terms[k];
            abs[k] += terms[k].abs();
        }
    }
    Ok(CancellationResiduals {
        r1: ratio(sums[0] + sums[1], abs[0] + abs[1]),
        r2: ratio(sums[2] + sums[3], abs[2] + abs[3]),
        r3: ratio(sums[4], abs[4]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn zero_state() {
        let g = make_grid(16).unwrap();
        let z = SpectralVector::zeros(&g);
        assert_eq!(cancellation_residuals_raw(&z, &z, &z).unwrap(), CancellationResiduals::default());
    }

    #[test]
    fn divergence_breaks_r2() {
        let g = make_grid(32).unwrap();
        // ∫(∇·u)|u|² = 1/2 for this field
        let u = SpectralVector::from_fn(&g, |x, y| x.cos() + y.cos(), |x, y| (x + y).sin()).unwrap();
        let v = u.scaled(1.5);
        let res = cancellation_residuals_raw(&u, &v, &u).unwrap();
        assert!(res.r2 > 1e-3, "{res:?}");
        let p = fields::leray_project(&u);
        let res = cancellation_residuals_raw(&p, &p.scaled(1.5), &p).unwrap();
        assert!(res.max() < 1e-13, "{res:?}");
    }
}
