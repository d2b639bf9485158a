//! Lyapunov functions `V(x) = V0(√(1+|x|²))`.
//!
//! [`construct_lyapunov`] builds `V0` from the tail profile
//! `v0(t) = sup_m m{|x| ≥ t}` of a tight family so that `m[V] ≤ 1` for
//! every member. The profile is a concave piecewise-affine minorant of
//! `-log v0` with slopes `2^{-n}`, smoothed by the cubic
//! `p(t) = ¼(t³ - 3t + 6)` over windows of half-width `1/8`.

use super::field::{Hessian, SmoothField};
use crate::{Error, Point, Result};

/// Breakpoints beyond this radius are treated as infinite; the profile is
/// affine past the last breakpoint.
const HORIZON: f64 = 1e15;
const MAX_LEVELS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `V0(t) = log(t + 1)`.
    Log,
    /// Breakpoints `a_n` and offsets `b_n` of the affine pieces
    /// `l_n(t) = 2^{-n}(t - a_n) + b_n`, with `a_0 = 0`, `b_0 = -1`.
    Constructed { a: Vec<f64>, b: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovFn {
    pub dim: usize,
    pub profile: Profile,
    /// Bounds on `sup|V0'|` and `sup|V0''|`.
    pub sup_first: f64,
    pub sup_second: f64,
}

/// `∫_{-1}^x p`.
fn p_integral(x: f64) -> f64 {
    0.25 * (x.powi(4) / 4.0 - 1.5 * x * x + 6.0 * x + 29.0 / 4.0)
}

fn p(x: f64) -> f64 {
    0.25 * (x * x * x - 3.0 * x + 6.0)
}

fn p_prime(x: f64) -> f64 {
    0.75 * (x * x - 1.0)
}

fn pow2(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

impl LyapunovFn {
    /// Returns `(v2, v2', v2'')` for the constructed profile.
    fn smoothed(a: &[f64], b: &[f64], t: f64) -> (f64, f64, f64) {
        // level n with a_n ≤ t < a_{n+1}
        let n = a.partition_point(|&x| x <= t).saturating_sub(1);
        let line = |k: usize, s: f64| pow2(k) * (s - a[k]) + b[k];
        // inside the window around a_{n+1} on its left side
        if n + 1 < a.len() && t > a[n + 1] - 0.125 {
            return Self::window(a, b, n + 1, t);
        }
        if n >= 1 && t < a[n] + 0.125 {
            return Self::window(a, b, n, t);
        }
        (line(n, t), pow2(n), 0.0)
    }

    fn window(a: &[f64], b: &[f64], n: usize, t: f64) -> (f64, f64, f64) {
        let start = a[n] - 0.125;
        let base = pow2(n - 1) * (start - a[n - 1]) + b[n - 1];
        let x = 8.0 * (t - a[n]);
        let w = pow2(n);
        (base + w * p_integral(x) / 8.0, w * p(x), 8.0 * w * p_prime(x))
    }

    /// `(V0, V0', V0'')` at `t ≥ 0`.
    pub fn profile_derivatives(&self, t: f64) -> (f64, f64, f64) {
        match &self.profile {
            Profile::Log => (
                (t + 1.0).ln(),
                1.0 / (t + 1.0),
                -1.0 / ((t + 1.0) * (t + 1.0)),
            ),
            Profile::Constructed { a, b } => {
                let (v, d1, d2) = Self::smoothed(a, b, t);
                ((v + 1.0) / 3.0, d1 / 3.0, d2 / 3.0)
            }
        }
    }

    pub fn v0(&self, t: f64) -> f64 {
        self.profile_derivatives(t).0
    }

    /// Largest `V0(s+t) - V0(s) - V0(t)` over the given pairs.
    pub fn subadditivity_defect(&self, pairs: &[(f64, f64)]) -> f64 {
        pairs
            .iter()
            .map(|&(s, t)| self.v0(s + t) - self.v0(s) - self.v0(t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest decrease `V0(s) - V0(t)` over pairs with `s ≤ t`.
    pub fn monotonicity_defect(&self, pairs: &[(f64, f64)]) -> f64 {
        pairs
            .iter()
            .map(|&(s, t)| {
                let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
                self.v0(lo) - self.v0(hi)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl SmoothField for LyapunovFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: Point) -> f64 {
        let r = (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt();
        self.v0(r)
    }

    fn gradient(&self, x: Point) -> Point {
        let r = (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt();
        let d1 = self.profile_derivatives(r).1;
        [d1 * x[0] / r, d1 * x[1] / r]
    }

    fn hessian(&self, x: Point) -> Hessian {
        let r = (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt();
        let (_, d1, d2) = self.profile_derivatives(r);
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let xx = x[i] * x[j] / (r * r);
                let id = if i == j { 1.0 } else { 0.0 };
                h[i][j] = d2 * xx + d1 * (id - xx) / r;
            }
        }
        h
    }

    fn period(&self) -> Option<f64> {
        None
    }
}

/// `V(x) = log(√(1+|x|²) + 1)`.
pub fn default_log_lyapunov(dim: usize) -> LyapunovFn {
    LyapunovFn {
        dim,
        profile: Profile::Log,
        sup_first: 0.5,
        sup_second: 0.25,
    }
}

/// First `t ≥ start` with `g(t) ≤ 0`, for `g` decreasing at most at unit
/// `rate`. Steps are the largest that cannot skip a crossing.
fn first_crossing<G: Fn(f64) -> f64>(g: G, start: f64, rate: f64) -> f64 {
    let mut t = start;
    for _ in 0..1_000_000 {
        let v = g(t);
        if v <= 1e-13 * (1.0 + rate * t) {
            return t;
        }
        let step = v / rate;
        if !step.is_finite() || t + step > HORIZON {
            return f64::INFINITY;
        }
        t += step;
    }
    t
}

/// Lyapunov function with `m[V] ≤ 1` for every measure whose tail
/// `m{|x| ≥ t}` is bounded by `tail(t)`.
///
/// `tail` must be nonincreasing with `tail(0) = 1` and tend to zero;
/// [`Error::NoLyapunov`] is returned when it does not decay.
pub fn construct_lyapunov<F: Fn(f64) -> f64>(dim: usize, tail: F) -> Result<LyapunovFn> {
    let t0 = tail(0.0);
    if (t0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("tail profile must equal 1 at 0, got {t0}")));
    }
    let far = tail(1e100);
    if !(far < 1e-3) {
        return Err(Error::NoLyapunov(format!(
            "tail profile is {far} at radius 1e100; the family is not tight"
        )));
    }
    let neg_log = |t: f64| {
        let v = tail(t);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            -v.ln()
        }
    };
    let mut a = vec![0.0];
    let mut b = vec![-1.0];
    loop {
        let n = a.len() - 1;
        if n >= MAX_LEVELS {
            return Err(Error::NoLyapunov(format!("no breakpoint closure after {MAX_LEVELS} levels")));
        }
        let (an, bn) = (a[n], b[n]);
        let slope = pow2(n);
        let line = move |t: f64| slope * (t - an) + bn;
        let g = |t: f64| neg_log(t) - line(t) - pow2(n + 1);
        let next = first_crossing(g, an, slope);
        // g(a_n) = 2^{-n-1} exactly; an immediate crossing is rounding noise in
        // the tail, so the profile stays affine from here on
        if !next.is_finite() || next <= an {
            break;
        }
        // the gap from a_n is at least 1/2 in exact arithmetic
        let next = next.max(an + 0.5);
        a.push(next);
        b.push(line(next));
    }
    Ok(LyapunovFn {
        dim,
        profile: Profile::Constructed { a, b },
        sup_first: 2.0 / 3.0,
        sup_second: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairs(n: usize, scale: f64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..n).map(|_| (rng.gen::<f64>() * scale, rng.gen::<f64>() * scale)).collect()
    }

    #[test]
    fn log_profile_values() {
        let v = default_log_lyapunov(1);
        assert!((v.value([0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!(v.subadditivity_defect(&pairs(1000, 50.0)) <= 0.0);
    }

    #[test]
    fn non_tight_family_is_rejected() {
        assert!(matches!(construct_lyapunov(1, |_| 1.0), Err(Error::NoLyapunov(_))));
    }

    fn check_profile(v: &LyapunovFn) {
        let ps = pairs(2000, 200.0);
        assert!(v.subadditivity_defect(&ps) <= 1e-12);
        assert!(v.monotonicity_defect(&ps) <= 1e-12);
        let mut t = 0.0;
        while t < 200.0 {
            let (_, d1, d2) = v.profile_derivatives(t);
            assert!(d1 > 0.0 && d1 <= 1.0 && d2.abs() <= 1.0 + 1e-12, "t={t}: {d1} {d2}");
            // derivative consistency
            let e = 1e-5;
            let fd = (v.v0(t + e) - v.v0((t - e).max(0.0))) / (t + e - (t - e).max(0.0));
            assert!((fd - d1).abs() < 1e-6, "t={t}");
            t += 0.01;
        }
    }

    #[test]
    fn uniform_family_integrates_below_one() {
        let tail = |t: f64| (1.0 - t).clamp(0.0, 1.0);
        let v = construct_lyapunov(1, tail).unwrap();
        check_profile(&v);
        let mv = 0.5 * quad::adaptive(&|x: f64| v.value([x, 0.0]), -1.0, 1.0, 1e-12).value;
        assert!(mv <= 1.0, "{mv}");
    }

    #[test]
    fn cauchy_integrates_below_one_and_grows() {
        let tail = |t: f64| 1.0 - 2.0 / std::f64::consts::PI * t.atan();
        let v = construct_lyapunov(1, tail).unwrap();
        check_profile(&v);
        let dens = |x: f64| v.value([x, 0.0]) / (std::f64::consts::PI * (1.0 + x * x));
        let mv = 2.0 * quad::radial(&dens, 0.0, f64::INFINITY, 1e-10).unwrap().value;
        assert!(mv <= 1.0, "{mv}");
        assert!(v.v0(1e12) > v.v0(1e6) + 0.1);
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let v = construct_lyapunov(2, |t: f64| (-t * t).exp()).unwrap();
        let x = [0.7, -1.3];
        let e = 1e-5;
        let g = v.gradient(x);
        let h = v.hessian(x);
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += e;
            xm[i] -= e;
            let fd = (v.value(xp) - v.value(xm)) / (2.0 * e);
            assert!((fd - g[i]).abs() < 1e-8);
            let gp = v.gradient(xp);
            let gm = v.gradient(xm);
            for j in 0..2 {
                assert!(((gp[j] - gm[j]) / (2.0 * e) - h[j][i]).abs() < 1e-6);
            }
        }
    }
}
