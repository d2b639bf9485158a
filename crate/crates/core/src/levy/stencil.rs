//! The ε-approximation `L^ε` as a nonnegative stencil on the periodic grid.
//!
//! ```text
//! L^ε μ(x) = Σ_j w_j (μ(x + o_j h) - μ(x))
//! ν^ε = |c|/ε δ_{εc/|c|}
//!     + Σ_i |a_i|²/ε² (δ_{εa_i/|a_i|} + δ_{-εa_i/|a_i|})
//!     + ν restricted to |z| ≥ ε
//!     + (1/ε) (push-forward of ν|_{B1∖Bε} under z ↦ -εz)
//! ```
//!
//! Densities are binned with moment-preserving linear weights (nearest-cell
//! lumping for isotropic 2D densities), jumps beyond the torus are folded
//! periodically, and atoms of drift and diffusion are snapped to the nearest
//! node. Both `L^ε` and its transpose are applied in a fixed summation order.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use super::measure::{Atom, Component, LineDensity};
use super::{LevyMeasureSpec, LevyTriplet};
use crate::grid::{GridFunction, GridSpec};
use crate::quad;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StencilPart {
    Drift,
    Diffusion,
    Outer,
    Compensator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilEntry {
    /// Displacement in grid cells, each axis in `[-N/2, N/2)`.
    pub offset: [i64; 2],
    pub weight: f64,
}

/// Finite nonnegative stencil realizing `L^ε` on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLevyOp {
    grid: GridSpec,
    epsilon: f64,
    effective_epsilon: f64,
    snap_error: f64,
    entries: Vec<StencilEntry>,
    parts: Vec<(StencilPart, [i64; 2], f64)>,
    total_mass: f64,
    c_bound: f64,
    shifts: Vec<[usize; 2]>,
}

/// Images of the torus folded explicitly when binning the jump density.
const FOLD_IMAGES: i64 = 8;
const FOLD_IMAGES_2D: i64 = 2;

struct Builder {
    grid: GridSpec,
    acc: BTreeMap<(StencilPart, [i64; 2]), f64>,
    snap: f64,
}

impl Builder {
    fn wrap(&self, o: i64) -> i64 {
        let n = self.grid.points as i64;
        (o + n / 2).rem_euclid(n) - n / 2
    }

    fn put(&mut self, part: StencilPart, o: [i64; 2], w: f64) {
        if w == 0.0 {
            return;
        }
        let o = if self.grid.dim == 1 {
            [self.wrap(o[0]), 0]
        } else {
            [self.wrap(o[0]), self.wrap(o[1])]
        };
        if o == [0, 0] {
            return;
        }
        *self.acc.entry((part, o)).or_insert(0.0) += w;
    }

    /// Linear (1D) or bilinear (2D) deposit, preserving mass and first moment.
    fn deposit(&mut self, part: StencilPart, pos: Point, mass: f64) {
        let h = self.grid.spacing();
        let u0 = pos[0] / h;
        let i0 = u0.floor();
        let t0 = u0 - i0;
        if self.grid.dim == 1 {
            self.put(part, [i0 as i64, 0], mass * (1.0 - t0));
            self.put(part, [i0 as i64 + 1, 0], mass * t0);
        } else {
            let u1 = pos[1] / h;
            let i1 = u1.floor();
            let t1 = u1 - i1;
            let (a, b) = (i0 as i64, i1 as i64);
            self.put(part, [a, b], mass * (1.0 - t0) * (1.0 - t1));
            self.put(part, [a + 1, b], mass * t0 * (1.0 - t1));
            self.put(part, [a, b + 1], mass * (1.0 - t0) * t1);
            self.put(part, [a + 1, b + 1], mass * t0 * t1);
        }
    }

    fn deposit_nearest(&mut self, part: StencilPart, pos: Point, mass: f64) {
        let h = self.grid.spacing();
        let o = [(pos[0] / h).round() as i64, (pos[1] / h).round() as i64];
        let d = (o[0] as f64 * h - pos[0]).hypot(o[1] as f64 * h - pos[1]);
        self.snap = self.snap.max(d);
        self.put(part, o, mass);
    }

    fn axis_offset(&self, axis: usize, j: i64) -> [i64; 2] {
        if axis == 0 {
            [j, 0]
        } else {
            [0, j]
        }
    }

    /// Hat-binned mass of the line density on `s ∈ [lo, hi]`, side `sign`,
    /// deposited at `sign·j` along `axis` (or at `-sign·j` when `reflect`).
    fn line_cells<F: Fn(f64) -> f64>(&mut self, part: StencilPart, axis: usize, sign: f64, lo: f64, hi: f64, dens: &F) {
        let h = self.grid.spacing();
        if hi <= lo {
            return;
        }
        let j0 = (lo / h).floor() as i64;
        let j1 = (hi / h).ceil() as i64;
        for j in j0..j1 {
            let a = (j as f64 * h).max(lo);
            let b = ((j + 1) as f64 * h).min(hi);
            if b <= a {
                continue;
            }
            let left = |s: f64| dens(s) * (1.0 - (s - j as f64 * h) / h);
            let right = |s: f64| dens(s) * ((s - j as f64 * h) / h);
            let wl = quad::gauss(&left, a, b, 8);
            let wr = quad::gauss(&right, a, b, 8);
            let sj = (sign as i64) * j;
            let o = self.axis_offset(axis, sj);
            self.put(part, o, wl);
            let o = self.axis_offset(axis, sj + sign as i64);
            self.put(part, o, wr);
        }
    }
}

fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

/// Builds `L^ε` for the triplet on `grid`.
///
/// `ε` is rounded to a positive multiple of the spacing; the rounding is
/// reported by [`DiscreteLevyOp::snap_error`].
pub fn build_epsilon_approx(t: &LevyTriplet, epsilon: f64, grid: &GridSpec) -> Result<DiscreteLevyOp> {
    if t.dim != grid.dim {
        return Err(Error::GridMismatch("triplet and grid dimensions differ".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    let h = grid.spacing();
    if epsilon < h * (1.0 - 1e-12) {
        return Err(Error::EpsilonUnresolved {
            epsilon,
            spacing: h,
            required_points: (grid.period() / epsilon).ceil() as usize,
        });
    }
    if epsilon >= grid.half_width {
        return Err(Error::InvalidInput("epsilon must be smaller than the half-width".into()));
    }
    let k = (epsilon / h).round().max(1.0);
    let eps = k * h;
    let mut b = Builder {
        grid: *grid,
        acc: BTreeMap::new(),
        snap: (eps - epsilon).abs(),
    };
    let d = t.dim;

    let c = t.drift;
    let cn = norm(c);
    if cn > 0.0 {
        b.deposit_nearest(StencilPart::Drift, [eps * c[0] / cn, eps * c[1] / cn], cn / eps);
    }
    for i in 0..d {
        let a = t.diffusion_column(i);
        let an = norm(a);
        if an > 0.0 {
            let m = an * an / (eps * eps);
            b.deposit_nearest(StencilPart::Diffusion, [eps * a[0] / an, eps * a[1] / an], m);
            b.deposit_nearest(StencilPart::Diffusion, [-eps * a[0] / an, -eps * a[1] / an], m);
        }
    }

    let p = grid.period();
    for comp in t.jump.components(d)? {
        match comp {
            Component::Atom(Atom { position: z, mass }) => {
                let r = norm(z);
                if r >= eps {
                    b.deposit(StencilPart::Outer, z, mass);
                }
                if r >= eps && r < 1.0 {
                    b.deposit(StencilPart::Compensator, [-eps * z[0], -eps * z[1]], mass / eps);
                }
            }
            Component::Line { axis, density, cutoff } => {
                line_component(&mut b, axis, &density, cutoff, eps, p)?;
            }
            Component::Radial { coef, beta, cutoff } => {
                radial_component(&mut b, coef, beta, cutoff, eps)?;
            }
        }
    }

    let c_bound = 4.0 * (cn + t.diffusion_norm2() + t.jump.small_jump_integral(d)?);
    Ok(DiscreteLevyOp::from_parts(*grid, epsilon, eps, b.snap, b.acc, c_bound))
}

fn line_component(b: &mut Builder, axis: usize, density: &LineDensity, cutoff: f64, eps: f64, p: f64) -> Result<()> {
    let far = (FOLD_IMAGES as f64 + 0.5) * p;
    for sign in [1.0, -1.0] {
        let dens = |s: f64| density.eval(sign * s);
        // outer part, folded explicitly up to `far`, remainder spread evenly
        b.line_cells(StencilPart::Outer, axis, sign, eps, cutoff.min(far), &dens);
        if cutoff > far {
            let rem = density.tail(sign, far, cutoff)?;
            let n = b.grid.points as i64;
            for j in 0..n {
                let o = b.axis_offset(axis, j);
                b.put(StencilPart::Outer, o, rem / n as f64);
            }
        }
        // compensator: mass f(sign s)/ε at -ε sign s for s ∈ [ε, min(1, cutoff))
        let top = cutoff.min(1.0);
        if top > eps {
            let h = b.grid.spacing();
            let (ylo, yhi) = (eps * eps, eps * top);
            let j0 = (ylo / h).floor() as i64;
            let j1 = (yhi / h).ceil() as i64;
            for j in j0..j1 {
                let a = (j as f64 * h).max(ylo) / eps;
                let bb = ((j + 1) as f64 * h).min(yhi) / eps;
                if bb <= a {
                    continue;
                }
                let x0 = j as f64 * h;
                let left = |s: f64| dens(s) / eps * (1.0 - (eps * s - x0) / h);
                let right = |s: f64| dens(s) / eps * ((eps * s - x0) / h);
                let wl = quad::log_segment(&left, a, bb, 1e-15).value;
                let wr = quad::log_segment(&right, a, bb, 1e-15).value;
                let sj = -(sign as i64) * j;
                let o = b.axis_offset(axis, sj);
                b.put(StencilPart::Compensator, o, wl);
                let o = b.axis_offset(axis, sj - sign as i64);
                b.put(StencilPart::Compensator, o, wr);
            }
        }
    }
    Ok(())
}

/// Tensor Gauss rule over the square `c ± half`, split into `sub²` sub-squares.
fn square_integral<F: Fn(f64, f64) -> f64>(f: &F, c: Point, half: f64, sub: usize) -> f64 {
    let r = quad::rule(4);
    let w = 2.0 * half / sub as f64;
    let mut s = 0.0;
    for a in 0..sub {
        for bb in 0..sub {
            let x0 = c[0] - half + (a as f64 + 0.5) * w;
            let y0 = c[1] - half + (bb as f64 + 0.5) * w;
            for (xi, wi) in r.nodes.iter().zip(&r.weights) {
                for (yj, wj) in r.nodes.iter().zip(&r.weights) {
                    s += wi * wj * f(x0 + 0.5 * w * xi, y0 + 0.5 * w * yj);
                }
            }
        }
    }
    s * 0.25 * w * w
}

fn radial_component(b: &mut Builder, coef: f64, beta: f64, cutoff: f64, eps: f64) -> Result<()> {
    if cutoff.is_finite() {
        return Err(Error::Unsupported("truncated isotropic measures in the 2D stencil".into()));
    }
    let g = b.grid;
    let h = g.spacing();
    let n = g.points as i64;
    let dens = |x: f64, y: f64| coef * x.hypot(y).powf(-beta);
    let kk = FOLD_IMAGES_2D;
    for a in -kk..=kk {
        for c in -kk..=kk {
            for i in -n / 2..n / 2 {
                for j in -n / 2..n / 2 {
                    let o = [i + a * n, j + c * n];
                    let v = [o[0] as f64 * h, o[1] as f64 * h];
                    let r = norm(v);
                    if r < eps * (1.0 - 1e-12) {
                        continue;
                    }
                    let sub = if r < 4.0 * h { 4 } else { 1 };
                    let w = square_integral(&dens, v, 0.5 * h, sub);
                    b.put(StencilPart::Outer, o, w);
                }
            }
        }
    }
    // mass outside the folded square, spread evenly
    let zb = (kk as f64 + 0.5) * g.period() - 0.5 * h;
    let nth = 512;
    let dth = 2.0 * std::f64::consts::PI / nth as f64;
    let far: f64 = super::measure::angles(nth)
        .iter()
        .map(|(cs, sn)| coef * (zb / cs.abs().max(sn.abs())).powf(2.0 - beta) / (beta - 2.0) * dth)
        .sum();
    for i in -n / 2..n / 2 {
        for j in -n / 2..n / 2 {
            b.put(StencilPart::Outer, [i, j], far / (n * n) as f64);
        }
    }
    // compensator density coef ε^{β-3} |y|^{-β} on ε² ≤ |y| < ε
    let comp = |x: f64, y: f64| {
        let r = x.hypot(y);
        if r >= eps * eps && r < eps {
            coef * eps.powf(beta - 3.0) * r.powf(-beta)
        } else {
            0.0
        }
    };
    let m = (eps / h).ceil() as i64 + 1;
    for i in -m..=m {
        for j in -m..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let w = square_integral(&comp, [i as f64 * h, j as f64 * h], 0.5 * h, 8);
            b.put(StencilPart::Compensator, [i, j], w);
        }
    }
    Ok(())
}

impl DiscreteLevyOp {
    fn from_parts(
        grid: GridSpec,
        epsilon: f64,
        effective_epsilon: f64,
        snap_error: f64,
        acc: BTreeMap<(StencilPart, [i64; 2]), f64>,
        c_bound: f64,
    ) -> Self {
        let mut merged: BTreeMap<[i64; 2], f64> = BTreeMap::new();
        let mut parts = Vec::with_capacity(acc.len());
        for ((part, o), w) in acc {
            if w > 0.0 {
                parts.push((part, o, w));
                *merged.entry(o).or_insert(0.0) += w;
            }
        }
        let entries: Vec<StencilEntry> = merged.into_iter().map(|(offset, weight)| StencilEntry { offset, weight }).collect();
        Self::assemble(grid, epsilon, effective_epsilon, snap_error, entries, parts, c_bound)
    }

    fn assemble(
        grid: GridSpec,
        epsilon: f64,
        effective_epsilon: f64,
        snap_error: f64,
        entries: Vec<StencilEntry>,
        parts: Vec<(StencilPart, [i64; 2], f64)>,
        c_bound: f64,
    ) -> Self {
        let n = grid.points as i64;
        let shifts = entries
            .iter()
            .map(|e| [e.offset[0].rem_euclid(n) as usize, e.offset[1].rem_euclid(n) as usize])
            .collect();
        let total_mass = entries.iter().map(|e| e.weight).sum();
        DiscreteLevyOp {
            grid,
            epsilon,
            effective_epsilon,
            snap_error,
            entries,
            parts,
            total_mass,
            c_bound,
            shifts,
        }
    }

    /// A stencil from explicit entries (offsets are wrapped, duplicates merged).
    pub fn from_entries(grid: GridSpec, entries: &[StencilEntry]) -> Result<Self> {
        let mut b = Builder {
            grid,
            acc: BTreeMap::new(),
            snap: 0.0,
        };
        for e in entries {
            if !(e.weight >= 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidInput("stencil weights must be nonnegative".into()));
            }
            b.put(StencilPart::Outer, e.offset, e.weight);
        }
        Ok(Self::from_parts(grid, 0.0, 0.0, 0.0, b.acc, f64::INFINITY))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// The requested ε.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The ε actually used (a multiple of the spacing).
    pub fn effective_epsilon(&self) -> f64 {
        self.effective_epsilon
    }

    /// Largest displacement introduced by snapping ε and drift/diffusion atoms.
    pub fn snap_error(&self) -> f64 {
        self.snap_error
    }

    pub fn entries(&self) -> &[StencilEntry] {
        &self.entries
    }

    /// Unmerged contributions of each part of `ν^ε`.
    pub fn parts(&self) -> &[(StencilPart, [i64; 2], f64)] {
        &self.parts
    }

    /// Total mass `W = Σ w_j`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn diagonal(&self) -> f64 {
        -self.total_mass
    }

    /// `c_L = 4(|c| + |a|² + ∫(1∧|z|²)ν)`.
    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    /// Transpose: offsets negated, weights unchanged.
    pub fn adjoint(&self) -> DiscreteLevyOp {
        let mut b = Builder {
            grid: self.grid,
            acc: BTreeMap::new(),
            snap: 0.0,
        };
        for &(part, o, w) in &self.parts {
            b.put(part, [-o[0], -o[1]], w);
        }
        let mut op = Self::from_parts(self.grid, self.epsilon, self.effective_epsilon, self.snap_error, b.acc, self.c_bound);
        // keep the exact weights (wrapping of -N/2 maps to itself)
        op.total_mass = op.entries.iter().map(|e| e.weight).sum();
        op
    }

    fn target(&self, i: usize, s: [usize; 2], forward: bool) -> usize {
        let n = self.grid.points;
        if self.grid.dim == 1 {
            if forward {
                (i + s[0]) % n
            } else {
                (i + n - s[0]) % n
            }
        } else {
            let (a, b) = (i / n, i % n);
            if forward {
                ((a + s[0]) % n) * n + (b + s[1]) % n
            } else {
                ((a + n - s[0]) % n) * n + (b + n - s[1]) % n
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::GridMismatch(format!("field of length {len} for a stencil on {} cells", self.grid.len())));
        }
        Ok(())
    }

    /// `out_i = Σ_j w_j (φ_{i+o_j} - φ_i)`.
    pub fn apply_slice(&self, phi: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let base = phi[i];
            let mut acc = 0.0;
            for (e, s) in self.entries.iter().zip(&self.shifts) {
                acc += e.weight * (phi[self.target(i, *s, true)] - base);
            }
            *o = acc;
        });
    }

    /// `out_i = Σ_j w_j (μ_{i-o_j} - μ_i)`, the transpose of [`Self::apply_slice`].
    pub fn apply_adjoint_slice(&self, mu: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let base = mu[i];
            let mut acc = 0.0;
            for (e, s) in self.entries.iter().zip(&self.shifts) {
                acc += e.weight * (mu[self.target(i, *s, false)] - base);
            }
            *o = acc;
        });
    }

    /// `out_i = Σ_j w_j q_{i-o_j}` (off-diagonal part of the transpose).
    pub(crate) fn gather_adjoint(&self, q: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 0.0;
            for (e, s) in self.entries.iter().zip(&self.shifts) {
                acc += e.weight * q[self.target(i, *s, false)];
            }
            *o = acc;
        });
    }

    pub fn apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        self.check_len(phi.values.len())?;
        let mut out = vec![0.0; phi.values.len()];
        self.apply_slice(&phi.values, &mut out);
        Ok(GridFunction::from_vec_unchecked(phi.grid, out))
    }

    pub fn apply_adjoint(&self, mu: &GridFunction) -> Result<GridFunction> {
        self.check_len(mu.values.len())?;
        let mut out = vec![0.0; mu.values.len()];
        self.apply_adjoint_slice(&mu.values, &mut out);
        Ok(GridFunction::from_vec_unchecked(mu.grid, out))
    }

    /// Position of an offset as a vector of ℝ^d (the representative in `[-R, R)^d`).
    pub fn offset_position(&self, o: [i64; 2]) -> Point {
        let h = self.grid.spacing();
        [o[0] as f64 * h, o[1] as f64 * h]
    }

    /// LK-norm of `L^ε` read as the pure-jump operator with drift `∫_{B1} z ν^ε`.
    pub fn lk_norm(&self) -> f64 {
        let mut c = [0.0; 2];
        let mut small = 0.0;
        let mut large = 0.0;
        for e in &self.entries {
            let z = self.offset_position(e.offset);
            let r = norm(z);
            if r < 1.0 {
                c[0] += z[0] * e.weight;
                c[1] += z[1] * e.weight;
                small += r * r * e.weight;
            } else {
                large += e.weight;
            }
        }
        norm(c) + 0.5 * small + 2.0 * large
    }

    /// The stencil as an atomic triplet on ℝ^d, whose Fourier symbol is the
    /// symbol of `L^ε` on the torus.
    pub fn to_triplet(&self) -> Result<LevyTriplet> {
        let atoms = self
            .entries
            .iter()
            .map(|e| Atom {
                position: self.offset_position(e.offset),
                mass: e.weight,
            })
            .collect::<Vec<_>>();
        let mut c = [0.0; 2];
        for a in &atoms {
            if norm(a.position) < 1.0 {
                c[0] += a.position[0] * a.mass;
                c[1] += a.position[1] * a.mass;
            }
        }
        let d = self.grid.dim;
        LevyTriplet::new(d, &c[..d], &vec![0.0; d * d], LevyMeasureSpec::Atoms(atoms))
    }

    /// CSV rows `offset[,offset_y],weight`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.grid.dim == 1 {
            writeln!(w, "offset,weight")?;
            for e in &self.entries {
                writeln!(w, "{},{}", e.offset[0], e.weight)?;
            }
        } else {
            writeln!(w, "offset_x,offset_y,weight")?;
            for e in &self.entries {
                writeln!(w, "{},{},{}", e.offset[0], e.offset[1], e.weight)?;
            }
        }
        Ok(())
    }
}
