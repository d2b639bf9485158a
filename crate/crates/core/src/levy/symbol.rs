//! Fourier symbols `ψ(k)` with `L e^{ik·x} = ψ(k) e^{ik·x}`.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use super::measure::{Component, LineDensity};
use super::LevyTriplet;
use crate::quad;
use crate::special::frac_laplacian_constant;
use crate::{Error, Result};

/// Symbol of the full operator: `i c·k - |aᵀk|² + ∫(e^{ik·z} - 1 - i k·z 1_{B1}) ν(dz)`.
pub fn symbol(t: &LevyTriplet, k: crate::Point) -> Result<Complex64> {
    let d = t.dim;
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..d {
        im += t.drift[i] * k[i];
        let mut col = 0.0;
        for j in 0..d {
            col += t.diffusion[j][i] * k[j];
        }
        re -= col * col;
    }
    let mut psi = Complex64::new(re, im);
    for c in t.jump.components(d)? {
        psi += component_symbol(&c, d, k)?;
    }
    if !(psi.re.is_finite() && psi.im.is_finite()) {
        return Err(Error::Symbol(format!("non-finite symbol at k = {k:?}")));
    }
    Ok(psi)
}

fn component_symbol(c: &Component, dim: usize, k: crate::Point) -> Result<Complex64> {
    match *c {
        Component::Atom(a) => {
            let kz = k[0] * a.position[0] + if dim == 2 { k[1] * a.position[1] } else { 0.0 };
            let r = a.position[0].hypot(a.position[1]);
            let comp = if r < 1.0 { kz } else { 0.0 };
            Ok(a.mass * Complex64::new(kz.cos() - 1.0, kz.sin() - comp))
        }
        Component::Radial { coef, beta, cutoff } => {
            if cutoff.is_finite() {
                return Err(Error::Symbol("truncated isotropic measures in 2D have no implemented symbol".into()));
            }
            let sigma = (beta - dim as f64) / 2.0;
            let kk = k[0].hypot(k[1]);
            Ok(Complex64::new(-coef / frac_laplacian_constant(dim, sigma) * kk.powf(2.0 * sigma), 0.0))
        }
        Component::Line { axis, density, cutoff } => {
            let ka = k[axis];
            if ka == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if cutoff.is_finite() {
                return line_symbol_numeric(&density, cutoff, ka);
            }
            match density {
                LineDensity::Power { coef, beta } => {
                    let sigma = (beta - 1.0) / 2.0;
                    Ok(Complex64::new(-coef / frac_laplacian_constant(1, sigma) * ka.abs().powf(2.0 * sigma), 0.0))
                }
                LineDensity::Cgmy { c, g, m, y } => {
                    let i = Complex64::new(0.0, 1.0);
                    let gy = gamma(-y);
                    let mm = Complex64::new(m, -ka);
                    let gg = Complex64::new(g, ka);
                    let base = mm.powf(y) - m.powf(y) + gg.powf(y) - g.powf(y);
                    let jump = |s: f64| s * (density.eval(s) - density.eval(-s));
                    if y < 1.0 {
                        let m1 = quad::radial(&jump, 0.0, 1.0, 1e-14)?.value;
                        Ok(c * gy * base - i * ka * m1)
                    } else {
                        let corr = i * ka * y * (m.powf(y - 1.0) - g.powf(y - 1.0));
                        let m1 = quad::radial(&jump, 1.0, f64::INFINITY, 1e-14)?.value;
                        Ok(c * gy * (base + corr) + i * ka * m1)
                    }
                }
            }
        }
    }
}

/// `sin x - x` without cancellation near zero.
fn sin_minus_id(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // Horner form of the Taylor series up to x^13
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0 * (1.0 - x2 / 156.0)))))
    } else {
        x.sin() - x
    }
}

/// `∫_{|s| ≤ cutoff} (e^{iks} - 1 - iks 1_{|s|<1}) f(s) ds` by direct quadrature.
pub(crate) fn line_symbol_numeric(density: &LineDensity, cutoff: f64, k: f64) -> Result<Complex64> {
    let even = |s: f64| density.eval(s) + density.eval(-s);
    let odd = |s: f64| density.eval(s) - density.eval(-s);
    let re_f = |s: f64| -2.0 * (0.5 * k * s).sin().powi(2) * even(s);
    let im_f = |s: f64| if s < 1.0 { sin_minus_id(k * s) } else { (k * s).sin() } * odd(s);
    let s0 = cutoff.min(1.0).min(1.0 / k.abs());
    let mut re = quad::log_head(&re_f, s0, 1e-14)?.value;
    let mut im = quad::log_head(&im_f, s0, 1e-14)?.value;
    let width = (std::f64::consts::PI / (4.0 * k.abs())).min(0.25);
    let mut breaks = vec![s0];
    if s0 < 1.0 && cutoff > 1.0 {
        breaks.push(1.0);
    }
    breaks.push(cutoff);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        for j in 0..n {
            let lo = a + (b - a) * j as f64 / n as f64;
            let hi = a + (b - a) * (j + 1) as f64 / n as f64;
            re += quad::gauss(&re_f, lo, hi, 16);
            im += quad::gauss(&im_f, lo, hi, 16);
        }
    }
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasureSpec;

    #[test]
    fn cgmy_closed_form_matches_quadrature() {
        for (g, m, y) in [(1.5, 3.0, 0.6), (2.0, 1.0, 1.4), (2.0, 2.0, 0.3)] {
            let spec = LevyMeasureSpec::TemperedStable { c: 0.8, g, m, y };
            let t = LevyTriplet::pure_jump(1, spec.clone()).unwrap();
            let density = LineDensity::Cgmy { c: 0.8, g, m, y };
            for k in [0.3, 1.0, 4.0, -2.5] {
                let closed = symbol(&t, [k, 0.0]).unwrap();
                let num = line_symbol_numeric(&density, 80.0, k).unwrap();
                assert!((closed - num).norm() < 1e-8, "G={g} M={m} Y={y} k={k}: {closed} vs {num}");
            }
        }
    }

    #[test]
    fn stable_symbol_is_minus_power() {
        let t = LevyTriplet::pure_jump(1, LevyMeasureSpec::stable(0.3, 1.0)).unwrap();
        let p = symbol(&t, [2.0, 0.0]).unwrap();
        assert!((p.re + 2f64.powf(0.6)).abs() < 1e-12 && p.im == 0.0);
        let trunc = LineDensity::Power {
            coef: frac_laplacian_constant(1, 0.3),
            beta: 1.6,
        };
        let cut = 1e4;
        let num = line_symbol_numeric(&trunc, cut, 2.0).unwrap();
        // the removed far jumps contribute 2c∫_cut^∞ (1 - cos 2s) s^{-1.6} ds ≈ 2c cut^{-0.6}/0.6
        let far = 2.0 * frac_laplacian_constant(1, 0.3) * cut.powf(-0.6) / 0.6;
        assert!((num.re + 2f64.powf(0.6) - far).abs() < 1e-5, "{num}");
    }

    #[test]
    fn local_part() {
        let t = LevyTriplet::new(2, &[1.0, -2.0], &[1.0, 0.0, 0.5, 2.0], LevyMeasureSpec::zero()).unwrap();
        let p = symbol(&t, [0.5, 1.0]).unwrap();
        // aᵀk = (1*0.5 + 0.5*1, 0*0.5 + 2*1) = (1, 2)
        assert!((p.re + 5.0).abs() < 1e-14);
        assert!((p.im - (0.5 - 2.0)).abs() < 1e-14);
    }
}
