//! Lévy triplets, measures and operators.
//!
//! A triplet `(c, a, ν)` defines
//!
//! ```text
//! L φ(x) = c·∇φ(x) + tr(a aᵀ D²φ(x))
//!        + ∫ (φ(x+z) - φ(x) - 1_{|z|<1} z·∇φ(x)) ν(dz)
//! ```

mod field;
mod holder;
mod lyapunov;
mod measure;
mod reference;
mod stencil;
mod symbol;

pub use field::{CosineField, FnField, PeriodicGaussian, SmoothBump, SmoothField, SplineField};
pub use holder::{holder_norm, holder_seminorm, holder_seminorm_samples};
pub use lyapunov::{construct_lyapunov, default_log_lyapunov, LyapunovFn, Profile};
pub use measure::{Atom, AxisStable, LevyMeasureSpec};
pub use reference::{apply_levy, apply_levy_at, apply_levy_grid, sup_on_points, QuadratureConfig};
pub use stencil::{build_epsilon_approx, DiscreteLevyOp, StencilEntry, StencilPart};
pub use symbol::symbol;

use crate::{Error, Point, Result};

/// The data `(c, a, ν)` of a Lévy operator on ℝ^d, d ∈ {1, 2}.
///
/// Unused slots of `drift` and `diffusion` are zero when d = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    pub dim: usize,
    pub drift: Point,
    /// Row-major `a`; its columns `a_i` are the diffusion directions.
    pub diffusion: [[f64; 2]; 2],
    pub jump: LevyMeasureSpec,
}

impl LevyTriplet {
    /// `drift` has length d, `diffusion` is d×d row-major.
    pub fn new(dim: usize, drift: &[f64], diffusion: &[f64], jump: LevyMeasureSpec) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidTriplet(format!("dimension {dim} not supported")));
        }
        if drift.len() != dim || diffusion.len() != dim * dim {
            return Err(Error::InvalidTriplet(format!(
                "drift needs {dim} entries and diffusion {} entries",
                dim * dim
            )));
        }
        if !drift.iter().chain(diffusion).all(|v| v.is_finite()) {
            return Err(Error::InvalidTriplet("non-finite coefficient".into()));
        }
        let mut c = [0.0; 2];
        c[..dim].copy_from_slice(drift);
        let mut a = [[0.0; 2]; 2];
        for i in 0..dim {
            for j in 0..dim {
                a[i][j] = diffusion[i * dim + j];
            }
        }
        jump.validate(dim)?;
        Ok(LevyTriplet {
            dim,
            drift: c,
            diffusion: a,
            jump,
        })
    }

    pub fn pure_jump(dim: usize, jump: LevyMeasureSpec) -> Result<Self> {
        Self::new(dim, &vec![0.0; dim], &vec![0.0; dim * dim], jump)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::pure_jump(dim, LevyMeasureSpec::zero())
    }

    pub fn drift_norm(&self) -> f64 {
        self.drift[0].hypot(self.drift[1])
    }

    /// Frobenius norm squared `|a|² = Σ |a_i|²`.
    pub fn diffusion_norm2(&self) -> f64 {
        self.diffusion.iter().flatten().map(|v| v * v).sum()
    }

    /// Column `a_i`.
    pub fn diffusion_column(&self, i: usize) -> Point {
        [self.diffusion[0][i], self.diffusion[1][i]]
    }

    /// Scales `c`, `a aᵀ` and `ν` by `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::InvalidInput("scale must be nonnegative".into()));
        }
        let r = s.sqrt();
        let jump = scale_measure(&self.jump, s);
        Ok(LevyTriplet {
            dim: self.dim,
            drift: [self.drift[0] * s, self.drift[1] * s],
            diffusion: [
                [self.diffusion[0][0] * r, self.diffusion[0][1] * r],
                [self.diffusion[1][0] * r, self.diffusion[1][1] * r],
            ],
            jump,
        })
    }
}

fn scale_measure(m: &LevyMeasureSpec, s: f64) -> LevyMeasureSpec {
    match m {
        LevyMeasureSpec::Stable { sigma, intensity } => LevyMeasureSpec::Stable {
            sigma: *sigma,
            intensity: intensity * s,
        },
        LevyMeasureSpec::TemperedStable { c, g, m, y } => LevyMeasureSpec::TemperedStable {
            c: c * s,
            g: *g,
            m: *m,
            y: *y,
        },
        LevyMeasureSpec::Atoms(a) => LevyMeasureSpec::Atoms(
            a.iter()
                .map(|x| Atom {
                    position: x.position,
                    mass: x.mass * s,
                })
                .collect(),
        ),
        LevyMeasureSpec::AnisotropicSum(p) => LevyMeasureSpec::AnisotropicSum(
            p.iter()
                .map(|x| AxisStable {
                    weight: x.weight * s,
                    ..*x
                })
                .collect(),
        ),
        LevyMeasureSpec::Truncated { inner, radius } => LevyMeasureSpec::Truncated {
            inner: Box::new(scale_measure(inner, s)),
            radius: *radius,
        },
    }
}

/// `|c| + |a|² + ½∫_{B1}|z|²ν(dz) + 2ν(B1ᶜ)`.
pub fn lk_norm(t: &LevyTriplet) -> Result<f64> {
    let small = t.jump.second_moment_ball(t.dim, 1.0)?;
    let large = t.jump.mass_outside(t.dim, 1.0)?;
    let v = t.drift_norm() + t.diffusion_norm2() + 0.5 * small + 2.0 * large;
    if !v.is_finite() {
        return Err(Error::InvalidMeasure("small-jump integral diverges".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::frac_laplacian_constant;

    #[test]
    fn lk_norm_simple_cases() {
        let t = LevyTriplet::new(1, &[1.0], &[0.0], LevyMeasureSpec::zero()).unwrap();
        assert_eq!(lk_norm(&t).unwrap(), 1.0);
        assert_eq!(lk_norm(&LevyTriplet::zero(2).unwrap()).unwrap(), 0.0);
        let t = LevyTriplet::new(2, &[3.0, 4.0], &[1.0, 0.0, 0.0, 2.0], LevyMeasureSpec::zero()).unwrap();
        assert_eq!(lk_norm(&t).unwrap(), 10.0);
    }

    #[test]
    fn lk_norm_fractional_laplacian_closed_form() {
        for s in [0.1, 0.25, 0.4, 0.6] {
            let t = LevyTriplet::pure_jump(1, LevyMeasureSpec::stable(s, 1.0)).unwrap();
            let c = frac_laplacian_constant(1, s) * 2.0;
            let exact = 0.5 * c / (2.0 - 2.0 * s) + 2.0 * c / (2.0 * s);
            assert!((lk_norm(&t).unwrap() - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn lk_norm_is_homogeneous() {
        let t = LevyTriplet::new(
            1,
            &[0.3],
            &[0.7],
            LevyMeasureSpec::TemperedStable {
                c: 1.0,
                g: 2.0,
                m: 1.0,
                y: 0.5,
            },
        )
        .unwrap();
        let a = lk_norm(&t).unwrap();
        let b = lk_norm(&t.scaled(2.5).unwrap()).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-10 * b);
    }
}
