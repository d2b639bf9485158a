//! FFT helpers and the spectral oracle `exp(t ψ(D)) φ` for translation-invariant operators.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{GridFunction, GridSpec};
use crate::levy::{symbol, LevyTriplet};
use crate::{Error, Result};

/// Angular frequencies `k_n = π n / R` in FFT order.
pub fn frequencies(grid: &GridSpec) -> Vec<f64> {
    let n = grid.points as i64;
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i } else { i - n };
            std::f64::consts::PI * m as f64 / grid.half_width
        })
        .collect()
}

fn transform(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.points;
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    if grid.dim == 1 {
        fft.process(data);
    } else {
        // rows (axis 1 contiguous), then columns
        for row in data.chunks_exact_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
    if inverse {
        let s = 1.0 / grid.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

pub(crate) fn forward(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, false);
    data
}

pub(crate) fn inverse_real(grid: &GridSpec, mut data: Vec<Complex64>) -> Vec<f64> {
    transform(grid, &mut data, true);
    data.into_iter().map(|c| c.re).collect()
}

/// Multiplies the DFT of `values` by `mult(k)` and returns the real part of the inverse.
pub(crate) fn fourier_multiply<F>(grid: &GridSpec, values: &[f64], mult: F) -> Result<Vec<f64>>
where
    F: Fn([f64; 2]) -> Result<Complex64>,
{
    let freqs = frequencies(grid);
    let mut hat = forward(grid, values);
    let n = grid.points;
    for (idx, h) in hat.iter_mut().enumerate() {
        let k = if grid.dim == 1 {
            [freqs[idx], 0.0]
        } else {
            [freqs[idx / n], freqs[idx % n]]
        };
        *h *= mult(k)?;
    }
    Ok(inverse_real(grid, hat))
}

fn check_dims(t: &LevyTriplet, phi: &GridFunction) -> Result<()> {
    if t.dim != phi.grid.dim {
        return Err(Error::GridMismatch(format!("triplet dimension {} vs grid dimension {}", t.dim, phi.grid.dim)));
    }
    Ok(())
}

/// `ψ(D) φ`: the operator applied through its symbol on the torus.
pub fn spectral_apply(t: &LevyTriplet, phi: &GridFunction) -> Result<GridFunction> {
    check_dims(t, phi)?;
    let v = fourier_multiply(&phi.grid, &phi.values, |k| symbol(t, k))?;
    Ok(GridFunction::from_vec_unchecked(phi.grid, v))
}

/// `exp(t ψ(D)) φ`, or `exp(t ψ(-D)) φ` for the adjoint semigroup when `adjoint` is set.
pub fn spectral_reference(tr: &LevyTriplet, phi: &GridFunction, t: f64, adjoint: bool) -> Result<GridFunction> {
    check_dims(tr, phi)?;
    if t == 0.0 {
        return Ok(phi.clone());
    }
    let v = fourier_multiply(&phi.grid, &phi.values, |k| {
        let kk = if adjoint { [-k[0], -k[1]] } else { k };
        let e = (t * symbol(tr, kk)?).exp();
        if !(e.re.is_finite() && e.im.is_finite()) {
            return Err(Error::Symbol(format!("exp(t ψ) overflows at k = {k:?}")));
        }
        Ok(e)
    })?;
    Ok(GridFunction::from_vec_unchecked(phi.grid, v))
}
