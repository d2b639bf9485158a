//! Smoothing couplings `𝔣(m) = -s (ρ̃ ⋆ ρ ⋆ m)` with a probability kernel `ρ`.
//!
//! On the grid `(ρ̃ ⋆ ρ)(z) = Σ_y ρ(y) ρ(y+z) h^d`, so that
//! `(𝔣(m₁) - 𝔣(m₂))[m₁ - m₂] = -s h^d Σ_x (ρ ⋆ (m₁ - m₂))(x)² ≤ 0`.

use num_complex::Complex64;

use crate::grid::spectral::{forward, inverse_real};
use crate::grid::{GridFunction, GridSpec, ProbabilityVector};
use crate::levy::holder_seminorm;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub grid: GridSpec,
    pub strength: f64,
    /// `ρ` indexed by grid offset (index 0 is the zero displacement),
    /// normalized so that `Σ ρ h^d = 1`.
    kernel: Vec<f64>,
    /// DFT of `ρ`.
    kernel_hat: Vec<Complex64>,
    /// DFT of `ρ̃ ⋆ ρ`.
    auto_hat: Vec<Complex64>,
}

/// Flat index of the grid offset closest to the displacement; axis 0 slow.
fn offset_coord(grid: &GridSpec, k: usize) -> [f64; 2] {
    let n = grid.points;
    let h = grid.spacing();
    let wrap = |i: usize| {
        let i = i as i64;
        let n = n as i64;
        (if i >= n / 2 { i - n } else { i }) as f64 * h
    };
    if grid.dim == 1 {
        [wrap(k), 0.0]
    } else {
        [wrap(k / n), wrap(k % n)]
    }
}

impl Coupling {
    /// Kernel given by its values at the grid offsets (index 0 is zero
    /// displacement); normalized internally.
    pub fn from_kernel(grid: GridSpec, kernel: Vec<f64>, strength: f64) -> Result<Self> {
        if kernel.len() != grid.len() {
            return Err(Error::GridMismatch("kernel length differs from the grid".into()));
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidInput(format!("coupling strength {strength} must be nonnegative")));
        }
        if kernel.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("coupling kernel must be nonnegative".into()));
        }
        let mass: f64 = kernel.iter().sum::<f64>() * grid.cell_volume();
        if !(mass > 0.0) {
            return Err(Error::InvalidInput("coupling kernel has zero mass".into()));
        }
        let kernel: Vec<f64> = kernel.iter().map(|v| v / mass).collect();
        let kernel_hat = forward(&grid, &kernel);
        let hd = grid.cell_volume();
        let auto_hat = kernel_hat.iter().map(|c| c.norm_sqr() * hd).map(|v| Complex64::new(v, 0.0)).collect();
        Ok(Coupling {
            grid,
            strength,
            kernel,
            kernel_hat,
            auto_hat,
        })
    }

    /// Periodized Gaussian kernel of standard deviation `width`.
    pub fn gaussian(grid: GridSpec, width: f64, strength: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("kernel width {width} must be positive")));
        }
        let p = grid.period();
        let kernel = (0..grid.len())
            .map(|k| {
                let z = offset_coord(&grid, k);
                let mut s = 0.0;
                for a in -2i32..=2 {
                    for b in -2i32..=2 {
                        if grid.dim == 1 && b != 0 {
                            continue;
                        }
                        let x = z[0] + a as f64 * p;
                        let y = z[1] + b as f64 * p;
                        s += (-(x * x + y * y) / (2.0 * width * width)).exp();
                    }
                }
                s
            })
            .collect();
        Self::from_kernel(grid, kernel, strength)
    }

    /// The coupling `𝔣 ≡ 0`.
    pub fn zero(grid: GridSpec) -> Self {
        let mut k = vec![0.0; grid.len()];
        k[0] = 1.0;
        Self::from_kernel(grid, k, 0.0).expect("valid dirac kernel")
    }

    pub fn is_zero(&self) -> bool {
        self.strength == 0.0
    }

    /// `ρ` by offset index.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// `ρ̃ ⋆ ρ` by offset index.
    pub fn autocorrelation(&self) -> Vec<f64> {
        inverse_real(&self.grid, self.auto_hat.clone())
    }

    fn convolve(&self, hat: &[Complex64], values: &[f64]) -> Vec<f64> {
        let mut f = forward(&self.grid, values);
        for (a, b) in f.iter_mut().zip(hat) {
            *a *= b;
        }
        inverse_real(&self.grid, f)
    }

    /// `𝔣` applied to signed cell masses.
    pub fn eval_weights(&self, weights: &[f64]) -> Result<GridFunction> {
        if weights.len() != self.grid.len() {
            return Err(Error::GridMismatch("measure length differs from the coupling grid".into()));
        }
        if self.is_zero() {
            return Ok(GridFunction::zeros(self.grid));
        }
        let c = self.convolve(&self.auto_hat, weights);
        GridFunction::new(self.grid, c.into_iter().map(|v| -self.strength * v).collect())
    }

    pub fn eval(&self, m: &ProbabilityVector) -> Result<GridFunction> {
        self.grid.check_same_space(&m.grid)?;
        self.eval_weights(&m.weights)
    }

    /// `ρ ⋆ μ` for signed cell masses.
    pub fn smooth(&self, weights: &[f64]) -> Vec<f64> {
        self.convolve(&self.kernel_hat, weights)
    }

    /// `-s h^d Σ (ρ ⋆ (m₁ - m₂))²`, equal to `(𝔣(m₁) - 𝔣(m₂))[m₁ - m₂]`.
    pub fn monotonicity_value(&self, m1: &ProbabilityVector, m2: &ProbabilityVector) -> Result<f64> {
        self.grid.check_same_space(&m1.grid)?;
        self.grid.check_same_space(&m2.grid)?;
        let d: Vec<f64> = m1.weights.iter().zip(&m2.weights).map(|(a, b)| a - b).collect();
        let s = self.smooth(&d);
        Ok(-self.strength * self.grid.cell_volume() * s.iter().map(|v| v * v).sum::<f64>())
    }

    /// `(s ‖ρ̃⋆ρ‖∞, s [ρ̃⋆ρ]₁)`: bounds on `‖𝔣(m)‖∞` and its Lipschitz constant
    /// over all probability vectors.
    pub fn bounds(&self) -> (f64, f64) {
        let auto = GridFunction::from_vec_unchecked(self.grid, self.autocorrelation());
        (self.strength * auto.sup_norm(), self.strength * holder_seminorm(&auto, 1.0))
    }
}
