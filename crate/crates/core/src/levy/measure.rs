//! Lévy measures: built-in families and their radial integrals.

use std::f64::consts::PI;

use crate::quad;
use crate::special::{frac_laplacian_constant, sphere_area};
use crate::{Error, Point, Result};

/// A point mass of a Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: Point,
    pub mass: f64,
}

/// One axis of an anisotropic sum: `weight · c_{1,σ} |z_axis|^{-1-2σ}` on the axis line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStable {
    pub axis: usize,
    pub sigma: f64,
    pub weight: f64,
}

/// Built-in Lévy measures. The small/large jump split is at radius 1.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasureSpec {
    /// Isotropic `intensity · c_{d,σ} |z|^{-d-2σ}`; generator `-intensity (-Δ)^σ`.
    Stable { sigma: f64, intensity: f64 },
    /// CGMY density `C e^{-G|z|}|z|^{-1-Y}` for z < 0 and `C e^{-Mz} z^{-1-Y}` for z > 0,
    /// carried by axis 0.
    TemperedStable { c: f64, g: f64, m: f64, y: f64 },
    /// Finitely many atoms.
    Atoms(Vec<Atom>),
    /// Sum of one-dimensional stable measures carried by coordinate axes.
    AnisotropicSum(Vec<AxisStable>),
    /// `inner` restricted to `|z| ≤ radius`.
    Truncated { inner: Box<LevyMeasureSpec>, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LineDensity {
    /// `coef |s|^{-beta}`
    Power { coef: f64, beta: f64 },
    Cgmy { c: f64, g: f64, m: f64, y: f64 },
}

impl LineDensity {
    pub(crate) fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        match *self {
            LineDensity::Power { coef, beta } => coef * a.powf(-beta),
            LineDensity::Cgmy { c, g, m, y } => {
                let rate = if s > 0.0 { m } else { g };
                c * (-rate * a).exp() * a.powf(-1.0 - y)
            }
        }
    }

    /// `∫_t^∞ f(sign·s) ds` for t > 0.
    pub(crate) fn tail(&self, sign: f64, t: f64, cutoff: f64) -> Result<f64> {
        if t >= cutoff {
            return Ok(0.0);
        }
        match *self {
            LineDensity::Power { coef, beta } => {
                let upper = if cutoff.is_finite() { cutoff.powf(1.0 - beta) } else { 0.0 };
                Ok(coef * (t.powf(1.0 - beta) - upper) / (beta - 1.0))
            }
            LineDensity::Cgmy { .. } => {
                let f = |s: f64| self.eval(sign * s);
                Ok(quad::radial(&f, t, cutoff, 1e-14)?.value)
            }
        }
    }

    fn symmetric(&self) -> bool {
        match *self {
            LineDensity::Power { .. } => true,
            LineDensity::Cgmy { g, m, .. } => g == m,
        }
    }
}

/// Decomposition of a measure into pieces with simple geometry.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Component {
    /// Density on the line `ℝ e_axis`, restricted to `|s| ≤ cutoff`.
    Line { axis: usize, density: LineDensity, cutoff: f64 },
    /// Isotropic `coef |z|^{-beta}` on ℝ², restricted to `|z| ≤ cutoff`.
    Radial { coef: f64, beta: f64, cutoff: f64 },
    Atom(Atom),
}

fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

const TOL: f64 = 1e-13;

impl LevyMeasureSpec {
    pub fn zero() -> Self {
        LevyMeasureSpec::Atoms(Vec::new())
    }

    /// Fractional Laplacian `-(-Δ)^σ` scaled by `intensity`.
    pub fn stable(sigma: f64, intensity: f64) -> Self {
        LevyMeasureSpec::Stable { sigma, intensity }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMeasure(m));
        match self {
            LevyMeasureSpec::Stable { sigma, intensity } => {
                if !(*sigma > 0.0 && *sigma < 1.0) {
                    return bad(format!("stable exponent σ = {sigma} outside (0,1): ∫(1∧|z|²)ν diverges"));
                }
                if !(*intensity >= 0.0 && intensity.is_finite()) {
                    return bad("stable intensity must be nonnegative".into());
                }
            }
            LevyMeasureSpec::TemperedStable { c, g, m, y } => {
                if !(*c >= 0.0 && *g > 0.0 && *m > 0.0) {
                    return bad("CGMY needs C ≥ 0 and G, M > 0".into());
                }
                if !(*y > 0.0 && *y < 2.0) {
                    return bad(format!("CGMY index Y = {y} outside (0,2): ∫(1∧|z|²)ν diverges"));
                }
                if *y == 1.0 {
                    return bad("CGMY index Y = 1 is not supported".into());
                }
            }
            LevyMeasureSpec::Atoms(atoms) => {
                for a in atoms {
                    if !(a.mass >= 0.0 && a.mass.is_finite()) || !a.position.iter().all(|v| v.is_finite()) {
                        return bad("atoms need finite positions and nonnegative masses".into());
                    }
                    if dim == 1 && a.position[1] != 0.0 {
                        return bad("atom has a second coordinate in dimension 1".into());
                    }
                    if norm(a.position) == 0.0 && a.mass > 0.0 {
                        return bad("atom at the origin".into());
                    }
                }
            }
            LevyMeasureSpec::AnisotropicSum(parts) => {
                for p in parts {
                    if p.axis >= dim {
                        return bad(format!("axis {} out of range for dimension {dim}", p.axis));
                    }
                    if !(p.sigma > 0.0 && p.sigma < 1.0) || !(p.weight >= 0.0) {
                        return bad("anisotropic parts need σ ∈ (0,1) and nonnegative weights".into());
                    }
                }
            }
            LevyMeasureSpec::Truncated { inner, radius } => {
                if !(*radius > 0.0) {
                    return bad("truncation radius must be positive".into());
                }
                inner.validate(dim)?;
            }
        }
        Ok(())
    }

    pub(crate) fn components(&self, dim: usize) -> Result<Vec<Component>> {
        self.validate(dim)?;
        Ok(self.components_unchecked(dim))
    }

    fn components_unchecked(&self, dim: usize) -> Vec<Component> {
        match self {
            LevyMeasureSpec::Stable { sigma, intensity } => {
                let coef = intensity * frac_laplacian_constant(dim, *sigma);
                if coef == 0.0 {
                    Vec::new()
                } else if dim == 1 {
                    vec![Component::Line {
                        axis: 0,
                        density: LineDensity::Power {
                            coef,
                            beta: 1.0 + 2.0 * sigma,
                        },
                        cutoff: f64::INFINITY,
                    }]
                } else {
                    vec![Component::Radial {
                        coef,
                        beta: dim as f64 + 2.0 * sigma,
                        cutoff: f64::INFINITY,
                    }]
                }
            }
            LevyMeasureSpec::TemperedStable { c, g, m, y } => vec![Component::Line {
                axis: 0,
                density: LineDensity::Cgmy {
                    c: *c,
                    g: *g,
                    m: *m,
                    y: *y,
                },
                cutoff: f64::INFINITY,
            }],
            LevyMeasureSpec::Atoms(atoms) => atoms.iter().filter(|a| a.mass > 0.0).map(|a| Component::Atom(*a)).collect(),
            LevyMeasureSpec::AnisotropicSum(parts) => parts
                .iter()
                .filter(|p| p.weight > 0.0)
                .map(|p| Component::Line {
                    axis: p.axis,
                    density: LineDensity::Power {
                        coef: p.weight * frac_laplacian_constant(1, p.sigma),
                        beta: 1.0 + 2.0 * p.sigma,
                    },
                    cutoff: f64::INFINITY,
                })
                .collect(),
            LevyMeasureSpec::Truncated { inner, radius } => inner
                .components_unchecked(dim)
                .into_iter()
                .filter_map(|c| match c {
                    Component::Line { axis, density, cutoff } => Some(Component::Line {
                        axis,
                        density,
                        cutoff: cutoff.min(*radius),
                    }),
                    Component::Radial { coef, beta, cutoff } => Some(Component::Radial {
                        coef,
                        beta,
                        cutoff: cutoff.min(*radius),
                    }),
                    Component::Atom(a) => (norm(a.position) <= *radius).then_some(Component::Atom(a)),
                })
                .collect(),
        }
    }

    /// `∫_{r1 ≤ |z| < r2} g(|z|) ν(dz)`.
    pub fn radial_integral<G: Fn(f64) -> f64>(&self, dim: usize, g: &G, r1: f64, r2: f64) -> Result<f64> {
        let mut total = 0.0;
        for c in self.components(dim)? {
            total += component_radial_integral(&c, dim, g, r1, r2)?;
        }
        Ok(total)
    }

    /// `ν(|z| ≥ r)`.
    pub fn mass_outside(&self, dim: usize, r: f64) -> Result<f64> {
        self.radial_integral(dim, &|_| 1.0, r, f64::INFINITY)
    }

    /// `∫_{|z| < r} |z|² ν(dz)`.
    pub fn second_moment_ball(&self, dim: usize, r: f64) -> Result<f64> {
        self.radial_integral(dim, &|s| s * s, 0.0, r)
    }

    /// `∫ (1 ∧ |z|²) ν(dz)`.
    pub fn small_jump_integral(&self, dim: usize) -> Result<f64> {
        Ok(self.second_moment_ball(dim, 1.0)? + self.mass_outside(dim, 1.0)?)
    }

    /// `∫_{r1 ≤ |z| < r2} z ν(dz)`.
    pub fn first_moment(&self, dim: usize, r1: f64, r2: f64) -> Result<Point> {
        let mut out = [0.0; 2];
        for c in self.components(dim)? {
            match c {
                Component::Line { axis, density, cutoff } => {
                    let hi = r2.min(cutoff);
                    if hi > r1 {
                        let f = |s: f64| s * (density.eval(s) - density.eval(-s));
                        out[axis] += quad::radial(&f, r1, hi, TOL)?.value;
                    }
                }
                Component::Radial { .. } => {}
                Component::Atom(a) => {
                    let r = norm(a.position);
                    if r >= r1 && r < r2 {
                        out[0] += a.mass * a.position[0];
                        out[1] += a.mass * a.position[1];
                    }
                }
            }
        }
        Ok(out)
    }

    /// `ν(A) = ν(-A)` for Borel `A ⊂ B1`.
    pub fn is_symmetric(&self, dim: usize) -> Result<bool> {
        let comps = self.components(dim)?;
        let mut atoms: Vec<Atom> = Vec::new();
        for c in &comps {
            match c {
                Component::Line { density, .. } => {
                    if !density.symmetric() {
                        return Ok(false);
                    }
                }
                Component::Radial { .. } => {}
                Component::Atom(a) => {
                    if norm(a.position) < 1.0 {
                        atoms.push(*a);
                    }
                }
            }
        }
        let mut used = vec![false; atoms.len()];
        for i in 0..atoms.len() {
            if used[i] {
                continue;
            }
            let a = atoms[i];
            let partner = (0..atoms.len()).find(|&j| {
                !used[j]
                    && j != i
                    && (atoms[j].position[0] + a.position[0]).abs() <= 1e-12
                    && (atoms[j].position[1] + a.position[1]).abs() <= 1e-12
                    && (atoms[j].mass - a.mass).abs() <= 1e-12 * a.mass.max(1.0)
            });
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// The exponent `2σ` for which the measure is expected to satisfy the
    /// small-jump growth condition, when one is intrinsic to the family.
    pub fn la_exponent(&self) -> Option<f64> {
        match self {
            LevyMeasureSpec::Stable { sigma, .. } => (2.0 * sigma < 1.0).then_some(2.0 * sigma),
            LevyMeasureSpec::TemperedStable { y, .. } => (*y < 1.0).then_some(*y),
            LevyMeasureSpec::AnisotropicSum(parts) => {
                let s = parts.iter().map(|p| 2.0 * p.sigma).fold(0.0, f64::max);
                (s < 1.0 && s > 0.0).then_some(s)
            }
            LevyMeasureSpec::Atoms(_) => None,
            LevyMeasureSpec::Truncated { inner, .. } => inner.la_exponent(),
        }
    }

    /// Constant `K` with `∫_{B1}(1 ∧ |z|^p/r^p) ν(dz) ≤ K r^{-2σ}/(p-2σ)`
    /// for `p ∈ (2σ, 1]`, `r ∈ (0, 1)`.
    ///
    /// Untruncated stable and anisotropic-stable measures use the closed form
    /// `c K_d / (2σ)`; everything else maximizes the ratio over a sample grid
    /// of `(p, r)`.
    pub fn la_constant(&self, dim: usize, two_sigma: f64) -> Result<f64> {
        if !(two_sigma > 0.0 && two_sigma < 1.0) {
            return Err(Error::InvalidInput(format!("2σ = {two_sigma} must lie in (0,1)")));
        }
        self.validate(dim)?;
        match self {
            LevyMeasureSpec::Stable { sigma, intensity } if (2.0 * sigma - two_sigma).abs() < 1e-15 => {
                return Ok(intensity * frac_laplacian_constant(dim, *sigma) * sphere_area(dim) / (2.0 * sigma));
            }
            LevyMeasureSpec::AnisotropicSum(parts) if parts.iter().all(|p| 2.0 * p.sigma <= two_sigma) => {
                return Ok(parts
                    .iter()
                    .map(|p| p.weight * frac_laplacian_constant(1, p.sigma) * 2.0 / (2.0 * p.sigma))
                    .sum());
            }
            _ => {}
        }
        let mut best: f64 = 0.0;
        for j in 1..=20 {
            let p = two_sigma + (1.0 - two_sigma) * j as f64 / 20.0;
            for i in 0..=60 {
                let r = 10f64.powf(-6.0 + 6.0 * i as f64 / 60.0).min(1.0 - 1e-12);
                let inner = self.radial_integral(dim, &|s: f64| s.powf(p), 0.0, r)? / r.powf(p);
                let outer = self.radial_integral(dim, &|_| 1.0, r, 1.0)?;
                best = best.max((p - two_sigma) * r.powf(two_sigma) * (inner + outer));
            }
        }
        Ok(best)
    }
}

pub(crate) fn component_radial_integral<G: Fn(f64) -> f64>(
    c: &Component,
    dim: usize,
    g: &G,
    r1: f64,
    r2: f64,
) -> Result<f64> {
    match *c {
        Component::Line { density, cutoff, .. } => {
            let hi = r2.min(cutoff);
            if hi <= r1 {
                return Ok(0.0);
            }
            let f = |s: f64| g(s) * (density.eval(s) + density.eval(-s));
            Ok(quad::radial(&f, r1, hi, TOL)?.value)
        }
        Component::Radial { coef, beta, cutoff } => {
            let hi = r2.min(cutoff);
            if hi <= r1 {
                return Ok(0.0);
            }
            let kd = sphere_area(dim);
            let f = |r: f64| g(r) * coef * r.powf(-beta) * r.powi(dim as i32 - 1) * kd;
            Ok(quad::radial(&f, r1, hi, TOL)?.value)
        }
        Component::Atom(a) => {
            let r = norm(a.position);
            Ok(if r >= r1 && r < r2 { a.mass * g(r) } else { 0.0 })
        }
    }
}

/// Angle-averaged helper used by 2D polar quadratures: `n` equispaced angles.
pub(crate) fn angles(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            (t.cos(), t.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_radial_integrals_match_closed_form() {
        for d in [1usize, 2] {
            for s in [0.1, 0.25, 0.4, 0.75] {
                let nu = LevyMeasureSpec::stable(s, 1.0);
                let c = frac_laplacian_constant(d, s) * sphere_area(d);
                let m2 = nu.second_moment_ball(d, 1.0).unwrap();
                let tail = nu.mass_outside(d, 1.0).unwrap();
                assert!((m2 - c / (2.0 - 2.0 * s)).abs() < 1e-10 * c, "d={d} s={s}");
                assert!((tail - c / (2.0 * s)).abs() < 1e-9 * c, "d={d} s={s}: {tail}");
            }
        }
    }

    #[test]
    fn invalid_exponents_rejected() {
        assert!(matches!(
            LevyMeasureSpec::stable(1.0, 1.0).validate(1),
            Err(Error::InvalidMeasure(_))
        ));
        let cg = LevyMeasureSpec::TemperedStable {
            c: 1.0,
            g: 1.0,
            m: 1.0,
            y: 2.0,
        };
        assert!(cg.validate(1).is_err());
    }

    #[test]
    fn symmetry_flags() {
        assert!(LevyMeasureSpec::stable(0.3, 1.0).is_symmetric(2).unwrap());
        let cg = |g, m| LevyMeasureSpec::TemperedStable { c: 1.0, g, m, y: 0.5 };
        assert!(cg(2.0, 2.0).is_symmetric(1).unwrap());
        assert!(!cg(1.0, 3.0).is_symmetric(1).unwrap());
        let at = |x: f64, w: f64| Atom { position: [x, 0.0], mass: w };
        assert!(LevyMeasureSpec::Atoms(vec![at(0.3, 1.0), at(-0.3, 1.0), at(2.0, 5.0)])
            .is_symmetric(1)
            .unwrap());
        assert!(!LevyMeasureSpec::Atoms(vec![at(0.3, 1.0), at(-0.3, 2.0)]).is_symmetric(1).unwrap());
    }

    #[test]
    fn cgmy_moments_against_direct_quadrature() {
        let nu = LevyMeasureSpec::TemperedStable {
            c: 0.7,
            g: 1.5,
            m: 3.0,
            y: 0.6,
        };
        // ∫_1^∞ e^{-Ms} s^{-1.6} ds + same with G, by plain adaptive quadrature on [1, 60]
        let f = |s: f64| 0.7 * ((-3.0 * s).exp() + (-1.5 * s).exp()) * s.powf(-1.6);
        let direct = quad::adaptive(&f, 1.0, 60.0, 1e-14).value;
        assert!((nu.mass_outside(1, 1.0).unwrap() - direct).abs() < 1e-11);
        let m1 = nu.first_moment(1, 1.0, f64::INFINITY).unwrap()[0];
        let g = |s: f64| 0.7 * ((-3.0 * s).exp() - (-1.5 * s).exp()) * s.powf(-0.6);
        assert!((m1 - quad::adaptive(&g, 1.0, 60.0, 1e-14).value).abs() < 1e-11);
    }

    #[test]
    fn la_constant_empirical_close_to_closed_form() {
        let s = 0.2;
        let nu = LevyMeasureSpec::stable(s, 1.0);
        let closed = nu.la_constant(1, 2.0 * s).unwrap();
        let trunc = LevyMeasureSpec::Truncated {
            inner: Box::new(nu),
            radius: 5.0,
        };
        let emp = trunc.la_constant(1, 2.0 * s).unwrap();
        assert!(emp <= closed * (1.0 + 1e-9));
        assert!(emp >= 0.99 * closed, "{emp} vs {closed}");
    }

    #[test]
    fn truncation_removes_far_mass() {
        let nu = LevyMeasureSpec::Truncated {
            inner: Box::new(LevyMeasureSpec::stable(0.25, 1.0)),
            radius: 2.0,
        };
        let c = frac_laplacian_constant(1, 0.25);
        let exact = 2.0 * c * (1.0 - 2f64.powf(-0.5)) / 0.5;
        assert!((nu.mass_outside(1, 1.0).unwrap() - exact).abs() < 1e-12);
    }
}
