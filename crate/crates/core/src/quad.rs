//! One-dimensional quadrature helpers built on Gauss–Legendre rules.
//!
//! Radial integrals of Lévy densities are singular at 0 and heavy-tailed at
//! infinity, so the semi-infinite helpers work in the log variable `z = e^v`
//! and close the tail with a geometric extrapolation.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::{Error, Result};

pub(crate) struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn build(order: usize) -> Rule {
    let gl = GaussLegendre::new(order.try_into().expect("nonzero order")).expect("valid Gauss-Legendre order");
    let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Cached Gauss–Legendre rule on [-1, 1]. Supported orders: 2, 4, 8, 16.
pub(crate) fn rule(order: usize) -> &'static Rule {
    static R2: OnceLock<Rule> = OnceLock::new();
    static R4: OnceLock<Rule> = OnceLock::new();
    static R8: OnceLock<Rule> = OnceLock::new();
    static R16: OnceLock<Rule> = OnceLock::new();
    match order {
        2 => R2.get_or_init(|| build(2)),
        4 => R4.get_or_init(|| build(4)),
        8 => R8.get_or_init(|| build(8)),
        16 => R16.get_or_init(|| build(16)),
        _ => panic!("unsupported Gauss-Legendre order {order}"),
    }
}

/// Fixed-order Gauss–Legendre on [a, b].
pub fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let r = rule(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Nodes and weights of a fixed-order rule mapped to [a, b], appended to `out`.
pub(crate) fn push_nodes(a: f64, b: f64, order: usize, out: &mut Vec<(f64, f64)>) {
    let r = rule(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        out.push((mid + half * x, w * half));
    }
}

/// Result of an integration together with an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive bisection with 16-point panels: the panel with the
/// largest error estimate is split until the total estimate is below `tol`,
/// reaches the rounding floor, or 4000 panels are in use.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0 };
    }
    // (a, b, value, error)
    let panel = |a: f64, b: f64| {
        let m = 0.5 * (a + b);
        let whole = gauss(f, a, b, 16);
        let left = gauss(f, a, m, 16);
        let right = gauss(f, m, b, 16);
        (a, b, left + right, (left + right - whole).abs())
    };
    let mut panels = vec![panel(a, b)];
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        let floor = 64.0 * f64::EPSILON * panels.iter().map(|p| p.2.abs()).sum::<f64>();
        if error <= tol.max(floor) || panels.len() >= 4000 {
            return Estimate { value, error };
        }
        let (k, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (k, p)| if p.3 > best.1 { (k, p.3) } else { best });
        let (pa, pb, _, _) = panels.swap_remove(k);
        let m = 0.5 * (pa + pb);
        if !(m > pa && m < pb) {
            return Estimate { value, error };
        }
        panels.push(panel(pa, m));
        panels.push(panel(m, pb));
    }
}

/// ∫_a^b f over 0 < a < b < ∞ in the log variable.
pub fn log_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Estimate {
    let g = |v: f64| {
        let z = v.exp();
        f(z) * z
    };
    adaptive(&g, a.ln(), b.ln(), tol)
}

fn geometric_march<G: Fn(f64) -> f64>(g: &G, start: f64, step: f64, tol: f64, context: &str) -> Result<Estimate> {
    let mut total = 0.0;
    let mut err = 0.0;
    let mut prev = f64::NAN;
    let mut prev_ratio = f64::NAN;
    let mut v = start;
    for k in 0..1400 {
        let next = v + step;
        if next.abs() > 700.0 {
            break;
        }
        let p = adaptive(g, v.min(next), v.max(next), tol * 1e-3);
        if !p.value.is_finite() {
            break;
        }
        total += p.value;
        err += p.error;
        v = next;
        if k >= 2 && prev.is_finite() && prev != 0.0 {
            let r = p.value / prev;
            if r > 0.0 && r < 1.0 {
                let tail = p.value * r / (1.0 - r);
                // a stable ratio means the remaining panels form a geometric series
                let stable = (r - prev_ratio).abs() <= 1e-9 * r;
                if tail.abs() <= tol || stable {
                    let spread = if stable { (r - prev_ratio).abs() / (1.0 - r) } else { 0.05 };
                    return Ok(Estimate {
                        value: total + tail,
                        error: err + tail.abs() * spread.max(1e-15),
                    });
                }
            }
            prev_ratio = r;
        } else if k >= 2 && p.value == 0.0 && prev == 0.0 {
            return Ok(Estimate { value: total, error: err });
        }
        prev = p.value;
    }
    Err(Error::Quadrature {
        estimate: prev.abs(),
        tolerance: tol,
        context: context.to_string(),
    })
}

/// ∫_a^∞ f for a > 0.
pub fn log_tail<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<Estimate> {
    let g = |v: f64| {
        let z = v.exp();
        if z.is_finite() {
            f(z) * z
        } else {
            0.0
        }
    };
    geometric_march(&g, a.ln(), 1.0, tol, "semi-infinite tail")
}

/// ∫_0^b f for b > 0, for integrands with an integrable singularity at 0.
pub fn log_head<F: Fn(f64) -> f64>(f: &F, b: f64, tol: f64) -> Result<Estimate> {
    let g = |v: f64| {
        let z = v.exp();
        if z > 0.0 {
            f(z) * z
        } else {
            0.0
        }
    };
    geometric_march(&g, b.ln(), -1.0, tol, "small-jump integral")
}

fn piece<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<Estimate> {
    match (lo == 0.0, hi.is_finite()) {
        (true, true) => log_head(f, hi, tol),
        (false, true) => Ok(log_segment(f, lo, hi, tol)),
        (false, false) => log_tail(f, lo, tol),
        (true, false) => {
            let h = log_head(f, 1.0, tol)?;
            let t = log_tail(f, 1.0, tol)?;
            Ok(Estimate {
                value: h.value + t.value,
                error: h.error + t.error,
            })
        }
    }
}

/// ∫_a^b f with 0 ≤ a < b ≤ ∞.
pub fn radial<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if !(b > a) {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let e = if a < 1.0 && b > 1.0 {
        let l = piece(f, a, 1.0, tol)?;
        let r = piece(f, 1.0, b, tol)?;
        Estimate {
            value: l.value + r.value,
            error: l.error + r.error,
        }
    } else {
        piece(f, a, b, tol)?
    };
    if !e.value.is_finite() {
        return Err(Error::Quadrature {
            estimate: f64::INFINITY,
            tolerance: tol,
            context: "radial integral".into(),
        });
    }
    Ok(e)
}

/// Golden-section maximization of a unimodal function on [a, b].
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    let (fa, fb) = (f(a), f(b));
    let mut best = (c, fc);
    for cand in [(d, fd), (a, fa), (b, fb)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        let f = |x: f64| 3.0 * x * x + 2.0 * x + 1.0;
        assert!((gauss(&f, 0.0, 2.0, 4) - 14.0).abs() < 1e-13);
    }

    #[test]
    fn tail_of_power_law() {
        let f = |z: f64| z.powf(-1.5);
        let e = log_tail(&f, 1.0, 1e-10).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8, "{}", e.value);
    }

    #[test]
    fn slow_tail_of_power_law() {
        let f = |z: f64| z.powf(-1.1);
        let e = log_tail(&f, 2.0, 1e-10).unwrap();
        let exact = 2f64.powf(-0.1) / 0.1;
        assert!((e.value - exact).abs() < 1e-7, "{} vs {}", e.value, exact);
    }

    #[test]
    fn head_with_singularity() {
        let f = |z: f64| z.powf(-0.8);
        let e = log_head(&f, 1.0, 1e-12).unwrap();
        assert!((e.value - 5.0).abs() < 1e-9, "{}", e.value);
    }

    #[test]
    fn radial_splits_at_one() {
        let f = |z: f64| z * z * (-z).exp();
        let e = radial(&f, 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9);
        let e = radial(&f, 0.5, 3.0, 1e-12).unwrap();
        let prim = |z: f64| -(z * z + 2.0 * z + 2.0) * (-z).exp();
        assert!((e.value - (prim(3.0) - prim(0.5))).abs() < 1e-11);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(&|x: f64| -(x - 0.3).powi(2) + 1.0, -2.0, 2.0, 200);
        assert!((x - 0.3).abs() < 1e-7 && (v - 1.0).abs() < 1e-13);
    }
}
