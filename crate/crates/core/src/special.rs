//! Constants attached to the fractional Laplacian.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Surface area of the unit sphere in ℝ^d: `2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

fn beta(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

/// Normalizing constant `c_{d,σ}` of the density `c |z|^{-d-2σ}` for which
/// the Lévy operator has symbol `-|k|^{2σ}`, i.e. equals `-(-Δ)^σ`.
///
/// ```text
/// c_{d,σ} = σ(1-σ) 2^{2σ+1} Γ(σ) / (K_d B(d/2, σ) Γ(2-σ))
/// ```
pub fn frac_laplacian_constant(d: usize, sigma: f64) -> f64 {
    let kd = sphere_area(d);
    sigma * (1.0 - sigma) * 2f64.powf(2.0 * sigma + 1.0) * gamma(sigma)
        / (kd * beta(d as f64 / 2.0, sigma) * gamma(2.0 - sigma))
}

/// `(c_{d,σ} K_d / (2σ)) (log 4 + π / sin(πσ))`, the sup-norm bound for
/// `(-Δ)^σ log(√(1+|x|²) + 1)`.
pub fn log_lyapunov_bound(d: usize, sigma: f64) -> f64 {
    frac_laplacian_constant(d, sigma) * sphere_area(d) / (2.0 * sigma) * (4f64.ln() + PI / (PI * sigma).sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical(d: usize, s: f64) -> f64 {
        4f64.powf(s) * gamma(d as f64 / 2.0 + s) / (PI.powf(d as f64 / 2.0) * gamma(-s).abs())
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn constant_agrees_with_classical_form() {
        for d in [1, 2] {
            for s in [0.05, 0.1, 0.25, 0.4, 0.5, 0.75, 0.9] {
                let a = frac_laplacian_constant(d, s);
                let b = classical(d, s);
                assert!((a - b).abs() < 1e-12 * b.max(1.0), "d={d} s={s}: {a} vs {b}");
            }
        }
        assert!((frac_laplacian_constant(1, 0.25) - 0.199_45).abs() < 1e-4);
    }
}
