//! Reference application of a Lévy operator to smooth fields by quadrature.
//!
//! Jumps below `r_q` use the second-order Taylor expansion, jumps in
//! `[r_q, 1)` are integrated with the compensator on geometric panels, and
//! jumps of size ≥ 1 are integrated directly. On the torus the large-jump
//! density is folded onto one period (lattice images up to `images`, the rest
//! by a midpoint-rule remainder); on ℝ^d it is integrated in the log variable.

use rayon::prelude::*;

use super::field::{SmoothField, SplineField};
use super::measure::{angles, Atom, Component, LineDensity};
use super::LevyTriplet;
use crate::grid::{GridFunction, GridSpec};
use crate::quad;
use crate::{Error, Point, Result};

/// Resolution of the reference quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Taylor radius `r_q` below which the second-order expansion is used; `None` means 1e-3.
    pub small_radius: Option<f64>,
    /// Maximal panel width for the large-jump integrals.
    pub panel_width: f64,
    /// Lattice images folded explicitly in periodic mode.
    pub images: usize,
    /// Angular nodes for isotropic measures in 2D.
    pub angles: usize,
    /// Tolerance for the tail error estimate.
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            small_radius: None,
            panel_width: 0.05,
            images: 8,
            angles: 64,
            tolerance: 1e-6,
        }
    }
}

enum Tail {
    /// Folded density at quadrature nodes `(s, w ω(s))` and their sum.
    Periodic { nodes: Vec<(Point, f64)>, total: f64 },
    Whole,
}

struct LinePrep {
    axis: usize,
    density: LineDensity,
    cutoff: f64,
    small: f64,
    mid: Vec<(f64, f64, f64)>,
    tail: Tail,
}

struct RadialPrep {
    coef: f64,
    beta: f64,
    small: f64,
    mid: Vec<(f64, f64)>,
    dirs: Vec<(f64, f64)>,
    tail: Tail,
}

struct Prepared {
    dim: usize,
    drift: Point,
    cols: Vec<Point>,
    lines: Vec<LinePrep>,
    radials: Vec<RadialPrep>,
    atoms: Vec<Atom>,
    tolerance: f64,
}

fn geometric_nodes(lo: f64, hi: f64, max_width: f64, order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if hi <= lo {
        return out;
    }
    let mut a = lo;
    while a < hi {
        let b = (2.0 * a).min(hi);
        let n = ((b - a) / max_width).ceil().max(1.0) as usize;
        for j in 0..n {
            let p = a + (b - a) * j as f64 / n as f64;
            let q = a + (b - a) * (j + 1) as f64 / n as f64;
            quad::push_nodes(p, q, order, &mut out);
        }
        a = b;
    }
    out
}

fn uniform_nodes(breaks: &[f64], max_width: f64, order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / max_width).ceil().max(1.0) as usize;
        for j in 0..n {
            quad::push_nodes(a + (b - a) * j as f64 / n as f64, a + (b - a) * (j + 1) as f64 / n as f64, order, &mut out);
        }
    }
    out
}

fn fold(v: f64, p: f64) -> f64 {
    (v + 0.5 * p).rem_euclid(p) - 0.5 * p
}

fn line_periodic_tail(density: &LineDensity, cutoff: f64, p: f64, cfg: &QuadratureConfig, sup_phi_bound: &mut f64) -> Result<Tail> {
    let r = 0.5 * p;
    if r <= 1.0 {
        return Err(Error::Unsupported("periodic reference quadrature needs half-width > 1".into()));
    }
    let k = cfg.images as i64;
    let z = (k as f64 + 0.5) * p;
    let mut breaks = vec![-r, r];
    for edge in [1.0, cutoff] {
        if edge.is_finite() {
            for sgn in [-1.0, 1.0] {
                let e = fold(sgn * edge, p);
                if e > -r && e < r {
                    breaks.push(e);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let raw = uniform_nodes(&breaks, cfg.panel_width, 8);
    let mut nodes = Vec::with_capacity(raw.len());
    let mut total = 0.0;
    for (s, w) in raw {
        let mut om = 0.0;
        for n in -k..=k {
            let u = s + n as f64 * p;
            let a = u.abs();
            if a >= 1.0 && a <= cutoff {
                om += density.eval(u);
            }
        }
        om += (density.tail(1.0, s + z, cutoff)? + density.tail(-1.0, z - s, cutoff)?) / p;
        nodes.push(([s, 0.0], w * om));
        total += w * om;
    }
    // midpoint error of the remainder: (P²/24) |f'| at the fold radius, per unit of sup|φ|
    let zz = z - r;
    let dz = 1e-3 * zz;
    let slope = |sgn: f64| ((density.eval(sgn * (zz + dz)) - density.eval(sgn * (zz - dz))) / (2.0 * dz)).abs();
    let est = if zz < cutoff { p * p / 24.0 * (slope(1.0) + slope(-1.0)) } else { 0.0 };
    *sup_phi_bound = sup_phi_bound.max(est);
    Ok(Tail::Periodic { nodes, total })
}

fn radial_periodic_tail(coef: f64, beta: f64, p: f64, cfg: &QuadratureConfig, est: &mut f64) -> Result<Tail> {
    let r = 0.5 * p;
    if r <= 1.0 {
        return Err(Error::Unsupported("periodic reference quadrature needs half-width > 1".into()));
    }
    let h = |rr: f64| coef * rr.powf(-beta);
    let mut nodes = Vec::new();
    let mut total = 0.0;
    // primary image: polar coordinates from radius 1 to the boundary of the cell
    let nth = 4 * cfg.angles;
    let dth = 2.0 * std::f64::consts::PI / nth as f64;
    for (c, s) in angles(nth) {
        let rb = r / c.abs().max(s.abs());
        for (rr, w) in uniform_nodes(&[1.0, rb], cfg.panel_width, 8) {
            let wt = w * dth * rr * h(rr);
            nodes.push(([rr * c, rr * s], wt));
            total += wt;
        }
    }
    // remaining lattice images on a tensor grid over the cell
    let k = (cfg.images as i64).min(3);
    let axis = uniform_nodes(&[-r, r], 2.0 * cfg.panel_width, 4);
    let tail_mass = |t: f64| coef * t.powf(2.0 - beta) / (beta - 2.0);
    let zb = (k as f64 + 0.5) * p;
    // mass outside the square of half-side zb, by angular integration of the radial tail
    let far: f64 = angles(nth)
        .iter()
        .map(|(c, s)| tail_mass(zb / c.abs().max(s.abs())) * dth)
        .sum();
    for &(x, wx) in &axis {
        for &(y, wy) in &axis {
            let mut om = 0.0;
            for a in -k..=k {
                for b in -k..=k {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let u = x + a as f64 * p;
                    let v = y + b as f64 * p;
                    om += h(u.hypot(v));
                }
            }
            om += far / (p * p);
            let wt = wx * wy * om;
            nodes.push(([x, y], wt));
            total += wt;
        }
    }
    // midpoint error over the far cells: (P²/24) ∫_{|z|>zb} |Δh|
    *est = est.max(p * p / 24.0 * 2.0 * std::f64::consts::PI * beta * coef * zb.powf(-beta));
    Ok(Tail::Periodic { nodes, total })
}

fn prepare(t: &LevyTriplet, period: Option<f64>, rq: f64, cfg: &QuadratureConfig) -> Result<(Prepared, f64)> {
    let d = t.dim;
    let mut lines = Vec::new();
    let mut radials = Vec::new();
    let mut atoms = Vec::new();
    let mut est: f64 = 0.0;
    for c in t.jump.components(d)? {
        match c {
            Component::Atom(a) => atoms.push(a),
            Component::Line { axis, density, cutoff } => {
                let top = cutoff.min(1.0);
                let small = 0.5 * super::measure::component_radial_integral(&c, d, &|s| s * s, 0.0, rq.min(cutoff))?;
                let mid = geometric_nodes(rq.min(top), top, cfg.panel_width, 16)
                    .into_iter()
                    .map(|(s, w)| (s, w * density.eval(s), w * density.eval(-s)))
                    .collect();
                let tail = match period {
                    Some(p) => line_periodic_tail(&density, cutoff, p, cfg, &mut est)?,
                    None => Tail::Whole,
                };
                lines.push(LinePrep {
                    axis,
                    density,
                    cutoff,
                    small,
                    mid,
                    tail,
                });
            }
            Component::Radial { coef, beta, cutoff } => {
                if cutoff.is_finite() {
                    return Err(Error::Unsupported("truncated isotropic measures in the 2D reference quadrature".into()));
                }
                let small = 0.5 * super::measure::component_radial_integral(&c, d, &|s| s * s, 0.0, rq)?;
                let nth = cfg.angles;
                let dth = 2.0 * std::f64::consts::PI / nth as f64;
                let mid = geometric_nodes(rq, 1.0, cfg.panel_width, 16)
                    .into_iter()
                    .map(|(r, w)| (r, w * dth * r * coef * r.powf(-beta)))
                    .collect();
                let tail = match period {
                    Some(p) => radial_periodic_tail(coef, beta, p, cfg, &mut est)?,
                    None => Tail::Whole,
                };
                radials.push(RadialPrep {
                    coef,
                    beta,
                    small,
                    mid,
                    dirs: angles(nth),
                    tail,
                });
            }
        }
    }
    let cols = (0..d).map(|i| t.diffusion_column(i)).collect();
    Ok((
        Prepared {
            dim: d,
            drift: t.drift,
            cols,
            lines,
            radials,
            atoms,
            tolerance: cfg.tolerance,
        },
        est,
    ))
}

fn shift(x: Point, axis: usize, s: f64) -> Point {
    let mut y = x;
    y[axis] += s;
    y
}

fn eval_at(p: &Prepared, f: &dyn SmoothField, x: Point) -> Result<f64> {
    let phi = f.value(x);
    let g = f.gradient(x);
    let h = f.hessian(x);
    let mut out = p.drift[0] * g[0] + p.drift[1] * g[1];
    for a in &p.cols {
        for i in 0..p.dim {
            for j in 0..p.dim {
                out += a[i] * h[i][j] * a[j];
            }
        }
    }
    for l in &p.lines {
        let ax = l.axis;
        let mut acc = l.small * h[ax][ax];
        for &(s, wp, wm) in &l.mid {
            acc += (f.value(shift(x, ax, s)) - phi - s * g[ax]) * wp;
            acc += (f.value(shift(x, ax, -s)) - phi + s * g[ax]) * wm;
        }
        match &l.tail {
            Tail::Periodic { nodes, total } => {
                let mut t = 0.0;
                for (s, w) in nodes {
                    t += f.value(shift(x, ax, s[0])) * w;
                }
                acc += t - phi * total;
            }
            Tail::Whole => {
                for sgn in [1.0, -1.0] {
                    let integrand = |s: f64| (f.value(shift(x, ax, sgn * s)) - phi) * l.density.eval(sgn * s);
                    let e = quad::radial(&integrand, 1.0, l.cutoff, 1e-3 * p.tolerance)?;
                    if e.error > p.tolerance {
                        return Err(Error::Quadrature {
                            estimate: e.error,
                            tolerance: p.tolerance,
                            context: "large-jump integral on the whole space".into(),
                        });
                    }
                    acc += e.value;
                }
            }
        }
        out += acc;
    }
    for r in &p.radials {
        let mut acc = r.small * 0.5 * (h[0][0] + h[1][1]);
        for &(rr, w) in &r.mid {
            let mut ang = 0.0;
            for &(c, s) in &r.dirs {
                let y = [x[0] + rr * c, x[1] + rr * s];
                ang += f.value(y) - phi - rr * (c * g[0] + s * g[1]);
            }
            acc += ang * w;
        }
        match &r.tail {
            Tail::Periodic { nodes, total } => {
                let mut t = 0.0;
                for (s, w) in nodes {
                    t += f.value([x[0] + s[0], x[1] + s[1]]) * w;
                }
                acc += t - phi * total;
            }
            Tail::Whole => {
                let dth = 2.0 * std::f64::consts::PI / r.dirs.len() as f64;
                let integrand = |rr: f64| {
                    let mut ang = 0.0;
                    for &(c, s) in &r.dirs {
                        ang += f.value([x[0] + rr * c, x[1] + rr * s]) - phi;
                    }
                    ang * dth * rr * r.coef * rr.powf(-r.beta)
                };
                let e = quad::radial(&integrand, 1.0, f64::INFINITY, 1e-3 * p.tolerance)?;
                if e.error > p.tolerance {
                    return Err(Error::Quadrature {
                        estimate: e.error,
                        tolerance: p.tolerance,
                        context: "large-jump integral on the whole space".into(),
                    });
                }
                acc += e.value;
            }
        }
        out += acc;
    }
    for a in &p.atoms {
        let z = a.position;
        let y = [x[0] + z[0], x[1] + z[1]];
        let comp = if z[0].hypot(z[1]) < 1.0 { z[0] * g[0] + z[1] * g[1] } else { 0.0 };
        out += a.mass * (f.value(y) - phi - comp);
    }
    Ok(out)
}

fn check_field(t: &LevyTriplet, f: &dyn SmoothField) -> Result<()> {
    if f.dim() != t.dim {
        return Err(Error::InvalidInput(format!("field dimension {} vs triplet dimension {}", f.dim(), t.dim)));
    }
    Ok(())
}

/// Evaluates `Lφ` at every node of `grid` for a field periodic with the grid's period.
pub fn apply_levy(t: &LevyTriplet, f: &dyn SmoothField, grid: &GridSpec, cfg: &QuadratureConfig) -> Result<GridFunction> {
    check_field(t, f)?;
    if grid.dim != t.dim {
        return Err(Error::GridMismatch("grid and triplet dimensions differ".into()));
    }
    let p = grid.period();
    match f.period() {
        Some(fp) if (fp - p).abs() <= 1e-12 * p => {}
        _ => return Err(Error::InvalidInput("field must be periodic with the grid period".into())),
    }
    let rq = cfg.small_radius.unwrap_or(1e-3);
    let (prep, est_per_unit) = prepare(t, Some(p), rq, cfg)?;
    let values: Vec<Result<f64>> = (0..grid.len()).into_par_iter().map(|i| eval_at(&prep, f, grid.coord(i))).collect();
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let osc = half_oscillation(f, grid);
    if est_per_unit * osc > cfg.tolerance {
        return Err(Error::Quadrature {
            estimate: est_per_unit * osc,
            tolerance: cfg.tolerance,
            context: "folded lattice remainder".into(),
        });
    }
    GridFunction::new(*grid, values)
}

// constants are integrated exactly by the folded remainder, so only the oscillation matters
fn half_oscillation(f: &dyn SmoothField, grid: &GridSpec) -> f64 {
    let (lo, hi) = (0..grid.len())
        .map(|i| f.value(grid.coord(i)))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    0.5 * (hi - lo)
}

/// Evaluates `Lφ(x)` at a single point; the field may live on ℝ^d or on a torus.
pub fn apply_levy_at(t: &LevyTriplet, f: &dyn SmoothField, x: Point, cfg: &QuadratureConfig) -> Result<f64> {
    check_field(t, f)?;
    let rq = cfg.small_radius.unwrap_or(1e-3);
    let (prep, _) = prepare(t, f.period(), rq, cfg)?;
    eval_at(&prep, f, x)
}

/// `Lφ` for a one-dimensional grid field through its periodic cubic spline.
pub fn apply_levy_grid(t: &LevyTriplet, phi: &GridFunction, cfg: &QuadratureConfig) -> Result<GridFunction> {
    let s = SplineField::new(phi)?;
    apply_levy(t, &s, &phi.grid, cfg)
}

/// Sup of `|Lφ|` over sample points for a field on ℝ^d.
pub fn sup_on_points(t: &LevyTriplet, f: &dyn SmoothField, xs: &[Point], cfg: &QuadratureConfig) -> Result<f64> {
    check_field(t, f)?;
    let rq = cfg.small_radius.unwrap_or(1e-3);
    let (prep, _) = prepare(t, f.period(), rq, cfg)?;
    let vals: Vec<Result<f64>> = xs.par_iter().map(|&x| eval_at(&prep, f, x)).collect();
    let mut m: f64 = 0.0;
    for v in vals {
        m = m.max(v?.abs());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::spectral_apply;
    use crate::levy::field::{CosineField, PeriodicGaussian};
    use crate::levy::LevyMeasureSpec;

    #[test]
    fn constants_are_annihilated() {
        let g = GridSpec::new(1, 4.0, 64, 1.0, 1).unwrap();
        let t = LevyTriplet::new(1, &[0.5], &[0.3], LevyMeasureSpec::stable(0.3, 1.0)).unwrap();
        let one = crate::levy::field::FnField {
            dim: 1,
            period: Some(8.0),
            value: Box::new(|_| 1.0),
            gradient: Box::new(|_| [0.0, 0.0]),
            hessian: Box::new(|_| [[0.0; 2]; 2]),
        };
        let out = apply_levy(&t, &one, &g, &QuadratureConfig::default()).unwrap();
        assert!(out.sup_norm() < 1e-13);
    }

    #[test]
    fn cosine_eigenfunction_of_fractional_laplacian() {
        let g = GridSpec::new(1, 4.0, 64, 1.0, 1).unwrap();
        let k = 3.0 * std::f64::consts::PI / 4.0;
        let f = CosineField {
            dim: 1,
            wave: [k, 0.0],
            period: Some(8.0),
        };
        for s in [0.2, 0.35] {
            let t = LevyTriplet::pure_jump(1, LevyMeasureSpec::stable(s, 1.0)).unwrap();
            let cfg = QuadratureConfig {
                images: 64,
                ..Default::default()
            };
            let out = apply_levy(&t, &f, &g, &cfg).unwrap();
            let lam = k.powf(2.0 * s);
            for i in 0..g.len() {
                let x = g.coord(i)[0];
                assert!((out.values[i] + lam * (k * x).cos()).abs() < 1e-6, "s={s} i={i} {} {}", out.values[i], -lam * (k * x).cos());
            }
        }
    }

    #[test]
    fn gaussian_bump_under_cgmy_matches_spectral_oracle() {
        let g = GridSpec::new(1, 4.0, 128, 1.0, 1).unwrap();
        let f = PeriodicGaussian::new(1, [0.3, 0.0], 0.35, Some(8.0));
        let t = LevyTriplet::pure_jump(
            1,
            LevyMeasureSpec::TemperedStable {
                c: 1.0,
                g: 1.5,
                m: 3.0,
                y: 0.7,
            },
        )
        .unwrap();
        let out = apply_levy(&t, &f, &g, &QuadratureConfig::default()).unwrap();
        let sampled = GridFunction::from_fn(g, |x| f.value(x));
        let spec = spectral_apply(&t, &sampled).unwrap();
        assert!(out.distance(&spec) < 1e-6, "{}", out.distance(&spec));
    }

    #[test]
    fn two_dimensional_stable_matches_spectral_oracle() {
        let g = GridSpec::new(2, 3.0, 16, 1.0, 1).unwrap();
        let f = PeriodicGaussian::new(2, [0.2, -0.1], 0.5, Some(6.0));
        let t = LevyTriplet::new(2, &[0.2, 0.0], &[0.3, 0.0, 0.1, 0.2], LevyMeasureSpec::stable(0.3, 1.0)).unwrap();
        let cfg = QuadratureConfig {
            panel_width: 0.1,
            tolerance: 1e-2,
            ..Default::default()
        };
        let out = apply_levy(&t, &f, &g, &cfg).unwrap();
        let fine = GridSpec::new(2, 3.0, 64, 1.0, 1).unwrap();
        let sampled = GridFunction::from_fn(fine, |x| f.value(x));
        let spec = spectral_apply(&t, &sampled).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..g.len() {
            let j = fine.nearest_index(g.coord(i));
            err = err.max((out.values[i] - spec.values[j]).abs());
        }
        assert!(err < 2e-3, "{err}");
    }
}
