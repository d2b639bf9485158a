//! Gain functions `L: [0,∞) → ℝ ∪ {∞}`, their conjugates
//! `F(z) = sup_{ζ≥0} (zζ - L(ζ))`, and the feedback `ζ* = F'(z)`.
//!
//! | gain                              | F(z)                                   |
//! |-----------------------------------|----------------------------------------|
//! | `IndicatorPoint { κ }`            | `κz`                                   |
//! | `IndicatorInterval { κ }`         | `κz⁺`                                  |
//! | `RegularizedInterval { κ, ε }`    | `κ(z+ε)²/(4ε)` on `[-ε,ε)`, `κz` above |
//! | `Power { q }`                     | `(q-1)/q (z⁺)^{q/(q-1)}`               |
//! | `Entropy`                         | `e^z`                                  |
//! | `Shifted { base, κ }`             | `F_base(z) + κz`                       |

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GainFunction {
    /// `0` at `κ`, `∞` elsewhere.
    IndicatorPoint { kappa: f64 },
    /// `0` on `[0, κ]`, `∞` elsewhere.
    IndicatorInterval { kappa: f64 },
    /// `ε(ζ²/κ - ζ)` on `[0, κ]`, `∞` elsewhere.
    RegularizedInterval { kappa: f64, eps: f64 },
    /// `ζ^q / q`.
    Power { q: f64 },
    /// `ζ log ζ - ζ`.
    Entropy,
    /// `L_base(ζ - κ)` on `[κ, ∞)`, `∞` below.
    Shifted { base: Box<GainFunction>, kappa: f64 },
}

impl GainFunction {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::HamiltonianParams(m));
        match self {
            GainFunction::IndicatorPoint { kappa } | GainFunction::IndicatorInterval { kappa } => {
                if !(kappa.is_finite() && *kappa >= 0.0) {
                    return bad(format!("kappa = {kappa} must be finite and nonnegative"));
                }
            }
            GainFunction::RegularizedInterval { kappa, eps } => {
                if !(kappa.is_finite() && *kappa > 0.0) {
                    return bad(format!("kappa = {kappa} must be positive"));
                }
                if !(eps.is_finite() && *eps > 0.0) {
                    return bad(format!("eps = {eps} must be positive"));
                }
            }
            GainFunction::Power { q } => {
                if !(q.is_finite() && *q > 1.0) {
                    return bad(format!("q = {q} must exceed 1"));
                }
            }
            GainFunction::Entropy => {}
            GainFunction::Shifted { base, kappa } => {
                if !(kappa.is_finite() && *kappa >= 0.0) {
                    return bad(format!("kappa = {kappa} must be finite and nonnegative"));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// `L(ζ)`; `+∞` outside the effective domain.
    pub fn eval(&self, zeta: f64) -> f64 {
        if zeta < 0.0 {
            return f64::INFINITY;
        }
        match self {
            GainFunction::IndicatorPoint { kappa } => {
                if zeta == *kappa {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            GainFunction::IndicatorInterval { kappa } => {
                if zeta <= *kappa {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            GainFunction::RegularizedInterval { kappa, eps } => {
                if zeta <= *kappa {
                    eps * (zeta * zeta / kappa - zeta)
                } else {
                    f64::INFINITY
                }
            }
            GainFunction::Power { q } => zeta.powf(*q) / q,
            GainFunction::Entropy => {
                if zeta == 0.0 {
                    0.0
                } else {
                    zeta * zeta.ln() - zeta
                }
            }
            GainFunction::Shifted { base, kappa } => {
                if zeta < *kappa {
                    f64::INFINITY
                } else {
                    base.eval(zeta - kappa)
                }
            }
        }
    }

    /// Points where the effective domain starts or ends.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            GainFunction::IndicatorPoint { kappa } | GainFunction::IndicatorInterval { kappa } => vec![0.0, *kappa],
            GainFunction::RegularizedInterval { kappa, .. } => vec![0.0, *kappa],
            GainFunction::Power { .. } | GainFunction::Entropy => vec![0.0],
            GainFunction::Shifted { base, kappa } => base.breakpoints().into_iter().map(|b| b + kappa).collect(),
        }
    }
}

/// Largest argument probed by [`conjugate_numeric`].
const ZETA_CAP: f64 = 1e12;

/// Brute-force `sup_{ζ≥0} (zζ - L(ζ))` on a ζ-grid of spacing `step`,
/// refined by golden-section search around the discrete maximizer.
///
/// The grid is doubled until its maximizer is interior or `L` is infinite
/// beyond it. A supremum still growing at `ζ = 10¹²` is reported as
/// [`Error::InfiniteConjugate`].
pub fn conjugate_numeric(gain: &GainFunction, z: f64, step: f64) -> Result<f64> {
    gain.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("zeta step {step} must be positive")));
    }
    let obj = |s: f64| z * s - gain.eval(s);
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0.0;
    let last_break = gain.breakpoints().into_iter().fold(0.0, f64::max);
    for b in gain.breakpoints() {
        let v = obj(b);
        if v > best {
            best = v;
            best_at = b;
        }
    }
    let mut hi = 64.0 * step;
    let mut k = 0usize;
    loop {
        let mut s = k as f64 * step;
        while s <= hi {
            let v = obj(s);
            if v > best {
                best = v;
                best_at = s;
            }
            k += 1;
            s = k as f64 * step;
        }
        let interior = best_at < 0.5 * hi;
        let flat = hi > last_break && gain.eval(hi).is_infinite();
        if interior || flat {
            break;
        }
        if hi >= ZETA_CAP {
            return Err(Error::InfiniteConjugate { z });
        }
        // keep the grid affordable: coarsen once far out
        if hi / step > 1e7 {
            return refine_unbounded(gain, z, hi);
        }
        hi *= 2.0;
    }
    // the objective is concave: refine between the neighbours of the maximizer
    let lo = (best_at - step).max(0.0);
    let up = best_at + step;
    let (x, v) = crate::quad::golden_max(&|s: f64| obj(s), lo, up, 200);
    if v.is_finite() && v > best {
        best = v;
        let _ = x;
    }
    Ok(best)
}

/// Continues the search geometrically once the linear grid becomes too long.
fn refine_unbounded(gain: &GainFunction, z: f64, start: f64) -> Result<f64> {
    let obj = |s: f64| z * s - gain.eval(s);
    let mut s = start;
    let mut prev = obj(s);
    while s < ZETA_CAP {
        let next = obj(2.0 * s);
        if next <= prev {
            let (_, v) = crate::quad::golden_max(&|t: f64| obj(t), 0.5 * s, 2.0 * s, 300);
            return Ok(v.max(prev));
        }
        prev = next;
        s *= 2.0;
    }
    Err(Error::InfiniteConjugate { z })
}

/// A conjugate pair with the analytic `F` and `F'`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub gain: GainFunction,
    /// Hölder exponent of `F'` (1 when `F'` is locally Lipschitz).
    pub gamma: f64,
    /// `inf F'`.
    pub lower_slope: f64,
    pub convex: bool,
    pub differentiable: bool,
}

impl Hamiltonian {
    /// The closed-form conjugate of `gain`.
    pub fn closed_form(gain: GainFunction) -> Result<Self> {
        gain.validate()?;
        let (gamma, lower_slope, differentiable) = Self::metadata(&gain);
        Ok(Hamiltonian {
            gain,
            gamma,
            lower_slope,
            convex: true,
            differentiable,
        })
    }

    fn metadata(gain: &GainFunction) -> (f64, f64, bool) {
        match gain {
            GainFunction::IndicatorPoint { kappa } => (1.0, *kappa, true),
            GainFunction::IndicatorInterval { .. } => (0.0, 0.0, false),
            GainFunction::RegularizedInterval { .. } => (1.0, 0.0, true),
            GainFunction::Power { q } => ((1.0 / (q - 1.0)).min(1.0), 0.0, true),
            GainFunction::Entropy => (1.0, 0.0, true),
            GainFunction::Shifted { base, kappa } => {
                let (g, l, d) = Self::metadata(base);
                (g, l + kappa, d)
            }
        }
    }

    /// `F(z)`.
    pub fn value(&self, z: f64) -> f64 {
        Self::f(&self.gain, z)
    }

    fn f(gain: &GainFunction, z: f64) -> f64 {
        match gain {
            GainFunction::IndicatorPoint { kappa } => kappa * z,
            GainFunction::IndicatorInterval { kappa } => kappa * z.max(0.0),
            GainFunction::RegularizedInterval { kappa, eps } => {
                if z < -eps {
                    0.0
                } else if z < *eps {
                    kappa / (4.0 * eps) * (z + eps) * (z + eps)
                } else {
                    kappa * z
                }
            }
            GainFunction::Power { q } => {
                let zp = z.max(0.0);
                if zp == 0.0 {
                    0.0
                } else {
                    (q - 1.0) / q * (q / (q - 1.0) * zp.ln()).exp()
                }
            }
            GainFunction::Entropy => z.exp(),
            GainFunction::Shifted { base, kappa } => Self::f(base, z) + kappa * z,
        }
    }

    /// `F'(z)`; the right derivative where `F` has a kink.
    pub fn derivative(&self, z: f64) -> f64 {
        Self::df(&self.gain, z)
    }

    fn df(gain: &GainFunction, z: f64) -> f64 {
        match gain {
            GainFunction::IndicatorPoint { kappa } => *kappa,
            GainFunction::IndicatorInterval { kappa } => {
                if z >= 0.0 {
                    *kappa
                } else {
                    0.0
                }
            }
            GainFunction::RegularizedInterval { kappa, eps } => {
                if z < -eps {
                    0.0
                } else if z < *eps {
                    kappa / (2.0 * eps) * (z + eps)
                } else {
                    *kappa
                }
            }
            GainFunction::Power { q } => {
                let zp = z.max(0.0);
                if zp == 0.0 {
                    0.0
                } else {
                    (zp.ln() / (q - 1.0)).exp()
                }
            }
            GainFunction::Entropy => z.exp(),
            GainFunction::Shifted { base, kappa } => Self::df(base, z) + kappa,
        }
    }

    /// Subdifferential `[F'(z-), F'(z+)]`.
    pub fn subdifferential(&self, z: f64) -> (f64, f64) {
        match &self.gain {
            GainFunction::IndicatorInterval { kappa } if z == 0.0 => (0.0, *kappa),
            GainFunction::Shifted { base, kappa } if matches!(**base, GainFunction::IndicatorInterval { .. }) && z == 0.0 => {
                let GainFunction::IndicatorInterval { kappa: k0 } = **base else {
                    unreachable!()
                };
                (*kappa, kappa + k0)
            }
            _ => {
                let d = self.derivative(z);
                (d, d)
            }
        }
    }

    /// Optimal control `ζ* = F'(z)`.
    pub fn optimal_control(&self, z: f64) -> Result<f64> {
        let (lower, upper) = self.subdifferential(z);
        if lower != upper {
            return Err(Error::NotDifferentiable { z, lower, upper });
        }
        Ok(lower)
    }

    /// Fails unless `F` is differentiable everywhere.
    pub fn require_differentiable(&self) -> Result<()> {
        if !self.differentiable {
            let (lower, upper) = self.subdifferential(0.0);
            return Err(Error::NotDifferentiable { z: 0.0, lower, upper });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::holder_seminorm_samples;
    use proptest::prelude::*;

    fn rows() -> Vec<GainFunction> {
        vec![
            GainFunction::IndicatorPoint { kappa: 1.5 },
            GainFunction::IndicatorInterval { kappa: 2.0 },
            GainFunction::RegularizedInterval { kappa: 1.0, eps: 0.5 },
            GainFunction::Power { q: 2.0 },
            GainFunction::Power { q: 3.0 },
            GainFunction::Entropy,
            GainFunction::Shifted {
                base: Box::new(GainFunction::Power { q: 2.0 }),
                kappa: 0.5,
            },
        ]
    }

    #[test]
    fn table_examples() {
        let b = GainFunction::IndicatorInterval { kappa: 2.0 };
        assert_eq!(conjugate_numeric(&b, -1.0, 1e-3).unwrap(), 0.0);
        assert!((conjugate_numeric(&b, 3.0, 1e-3).unwrap() - 6.0).abs() < 1e-12);
        let d = GainFunction::Power { q: 2.0 };
        assert!((conjugate_numeric(&d, 1.0, 1e-3).unwrap() - 0.5).abs() < 1e-9);
        assert!((conjugate_numeric(&GainFunction::Entropy, 0.0, 1e-3).unwrap() - 1.0).abs() < 1e-9);

        let a = Hamiltonian::closed_form(GainFunction::IndicatorPoint { kappa: 1.0 }).unwrap();
        assert_eq!(a.value(0.7), 0.7);
        assert_eq!(a.optimal_control(-3.0).unwrap(), 1.0);
        let d = Hamiltonian::closed_form(d).unwrap();
        assert_eq!(d.gamma, 1.0);
        assert_eq!(d.derivative(2.0), 2.0);
        assert_eq!(d.derivative(-2.0), 0.0);
        let e = Hamiltonian::closed_form(GainFunction::Entropy).unwrap();
        assert_eq!(e.optimal_control(0.0).unwrap(), 1.0);
        let f = Hamiltonian::closed_form(rows()[6].clone()).unwrap();
        assert_eq!(f.lower_slope, 0.5);
        assert!((f.value(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kink_is_rejected() {
        let b = Hamiltonian::closed_form(GainFunction::IndicatorInterval { kappa: 2.0 }).unwrap();
        assert!(matches!(
            b.optimal_control(0.0),
            Err(Error::NotDifferentiable { lower, upper, .. }) if lower == 0.0 && upper == 2.0
        ));
        assert!(b.require_differentiable().is_err());
        assert!(Hamiltonian::closed_form(GainFunction::Power { q: 1.0 }).is_err());
    }

    #[test]
    fn conjugacy_on_a_grid() {
        for g in rows() {
            let h = Hamiltonian::closed_form(g.clone()).unwrap();
            for k in 0..=200 {
                let z = -5.0 + k as f64 * 0.05;
                let n = conjugate_numeric(&g, z, 1e-3).unwrap();
                assert!((n - h.value(z)).abs() <= 1e-6 * (1.0 + h.value(z).abs()), "{g:?} z={z}");
            }
        }
    }

    #[test]
    fn derivative_of_power_is_gamma_holder() {
        let h = Hamiltonian::closed_form(GainFunction::Power { q: 3.0 }).unwrap();
        assert_eq!(h.gamma, 0.5);
        let zs: Vec<f64> = (0..2000).map(|k| -2.0 + k as f64 * 0.002).collect();
        let ds: Vec<f64> = zs.iter().map(|&z| h.derivative(z)).collect();
        assert!(holder_seminorm_samples(&zs, &ds, h.gamma) <= 1.0 + 1e-9);
    }

    proptest! {
        #[test]
        fn young_inequality(row in 0usize..7, z in -5.0f64..5.0, zeta in 0.0f64..5.0) {
            let h = Hamiltonian::closed_form(rows()[row].clone()).unwrap();
            prop_assert!(z * zeta <= h.value(z) + h.gain.eval(zeta) + 1e-12);
            if h.differentiable {
                let s = h.derivative(z);
                let gap = h.value(z) + h.gain.eval(s) - z * s;
                prop_assert!(gap.abs() <= 1e-9 * (1.0 + h.value(z).abs()), "gap {}", gap);
            }
        }

        #[test]
        fn monotone_and_convex(row in 0usize..7, a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let h = Hamiltonian::closed_form(rows()[row].clone()).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(h.value(lo) <= h.value(hi));
            prop_assert!(h.value(0.5 * (a + b)) <= 0.5 * (h.value(a) + h.value(b)) + 1e-12);
            prop_assert!(h.derivative(lo) >= h.lower_slope && h.derivative(lo) <= h.derivative(hi));
        }
    }
}
