//! Windowed Hölder seminorms `[φ]_α = sup_{0<|x-y|≤1} |φ(x)-φ(y)| / |x-y|^α`.

use rayon::prelude::*;

use crate::grid::GridFunction;

/// Seminorm over all pairs of grid nodes at torus distance in `(0, 1]`.
pub fn holder_seminorm(phi: &GridFunction, alpha: f64) -> f64 {
    let g = &phi.grid;
    let n = g.points as i64;
    let h = g.spacing();
    let reach = ((1.0 / h).floor() as i64).min(n / 2);
    let lags: Vec<[i64; 2]> = if g.dim == 1 {
        (1..=reach).map(|k| [k, 0]).collect()
    } else {
        // half-plane of lags; the other half gives the same pairs
        let mut v = Vec::new();
        for i in 0..=reach {
            for j in -reach..=reach {
                if i == 0 && j <= 0 {
                    continue;
                }
                v.push([i, j]);
            }
        }
        v
    };
    let vals = &phi.values;
    lags.par_iter()
        .map(|&[i, j]| {
            let d = (i as f64 * h).hypot(j as f64 * h);
            if d > 1.0 + 1e-12 {
                return 0.0;
            }
            let scale = d.powf(-alpha);
            let mut m: f64 = 0.0;
            if g.dim == 1 {
                let nn = n as usize;
                for a in 0..nn {
                    let b = (a + i as usize) % nn;
                    m = m.max((vals[a] - vals[b]).abs());
                }
            } else {
                let nn = n as usize;
                let (di, dj) = (i.rem_euclid(n) as usize, j.rem_euclid(n) as usize);
                for a in 0..nn {
                    for c in 0..nn {
                        let p = a * nn + c;
                        let q = ((a + di) % nn) * nn + (c + dj) % nn;
                        m = m.max((vals[p] - vals[q]).abs());
                    }
                }
            }
            m * scale
        })
        .reduce(|| 0.0, f64::max)
}

/// `‖φ‖_∞ + [φ]_α`.
pub fn holder_norm(phi: &GridFunction, alpha: f64) -> f64 {
    phi.sup_norm() + holder_seminorm(phi, alpha)
}

/// Seminorm of scattered samples `(x_k, y_k)` on the line (no periodicity).
pub fn holder_seminorm_samples(xs: &[f64], ys: &[f64], alpha: f64) -> f64 {
    let mut idx: Vec<usize> = (0..xs.len().min(ys.len())).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut m: f64 = 0.0;
    for (k, &a) in idx.iter().enumerate() {
        for &b in &idx[k + 1..] {
            let d = xs[b] - xs[a];
            if d > 1.0 {
                break;
            }
            if d > 0.0 {
                m = m.max((ys[b] - ys[a]).abs() / d.powf(alpha));
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn constant_has_zero_seminorm() {
        let g = GridSpec::new(2, 2.0, 16, 1.0, 1).unwrap();
        assert_eq!(holder_seminorm(&GridFunction::constant(g, 3.0), 0.5), 0.0);
    }

    #[test]
    fn identity_is_lipschitz_one() {
        let xs: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        assert!((holder_seminorm_samples(&xs, &xs, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_is_half_holder() {
        let xs: Vec<f64> = (-400..=400).map(|k| k as f64 / 400.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.abs().sqrt()).collect();
        // brute force over all pairs
        let mut brute: f64 = 0.0;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                let d = (xs[i] - xs[j]).abs();
                if d > 0.0 && d <= 1.0 {
                    brute = brute.max((ys[i] - ys[j]).abs() / d.sqrt());
                }
            }
        }
        let s = holder_seminorm_samples(&xs, &ys, 0.5);
        assert!((s - brute).abs() < 1e-12);
        assert!((s - 1.0).abs() < 0.05, "{s}");
    }

    #[test]
    fn periodic_seminorm_of_sine() {
        let g = GridSpec::new(1, std::f64::consts::PI, 256, 1.0, 1).unwrap();
        let phi = GridFunction::from_fn(g, |x| x[0].sin());
        let s = holder_seminorm(&phi, 1.0);
        assert!(s <= 1.0 && s > 0.999, "{s}");
        assert!(holder_seminorm(&phi, 0.5) <= s);
    }
}
