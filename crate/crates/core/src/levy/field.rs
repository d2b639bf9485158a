//! Smooth test fields with analytic derivatives, used by the reference quadrature.

use num_complex::Complex64;

use crate::grid::GridFunction;
use crate::{Error, Point, Result};

pub type Hessian = [[f64; 2]; 2];

/// A C² field on ℝ^d or on the torus of the given period.
pub trait SmoothField: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> Point;
    fn hessian(&self, x: Point) -> Hessian;
    /// `Some(P)` when the field is `P`-periodic in every coordinate.
    fn period(&self) -> Option<f64>;
}

type ValueFn = Box<dyn Fn(Point) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(Point) -> Point + Send + Sync>;
type HessFn = Box<dyn Fn(Point) -> Hessian + Send + Sync>;

/// Field given by closures.
pub struct FnField {
    pub dim: usize,
    pub period: Option<f64>,
    pub value: ValueFn,
    pub gradient: GradFn,
    pub hessian: HessFn,
}

impl SmoothField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: Point) -> Point {
        (self.gradient)(x)
    }
    fn hessian(&self, x: Point) -> Hessian {
        (self.hessian)(x)
    }
    fn period(&self) -> Option<f64> {
        self.period
    }
}

fn images(dim: usize, reach: i32) -> Vec<[f64; 2]> {
    let mut v = Vec::new();
    for a in -reach..=reach {
        if dim == 1 {
            v.push([a as f64, 0.0]);
        } else {
            for b in -reach..=reach {
                v.push([a as f64, b as f64]);
            }
        }
    }
    v
}

/// `exp(-|x-c|²/(2w²))`, periodized when a period is given.
pub struct PeriodicGaussian {
    pub dim: usize,
    pub center: Point,
    pub width: f64,
    pub period: Option<f64>,
    shifts: Vec<[f64; 2]>,
}

impl PeriodicGaussian {
    pub fn new(dim: usize, center: Point, width: f64, period: Option<f64>) -> Self {
        let shifts = match period {
            Some(_) => images(dim, 3),
            None => vec![[0.0, 0.0]],
        };
        PeriodicGaussian {
            dim,
            center,
            width,
            period,
            shifts,
        }
    }

    fn each<F: FnMut([f64; 2], f64)>(&self, x: Point, mut f: F) {
        let p = self.period.unwrap_or(0.0);
        let w2 = self.width * self.width;
        for s in &self.shifts {
            let y0 = x[0] - self.center[0] + s[0] * p;
            let y1 = if self.dim == 2 { x[1] - self.center[1] + s[1] * p } else { 0.0 };
            let e = (-(y0 * y0 + y1 * y1) / (2.0 * w2)).exp();
            f([y0, y1], e);
        }
    }
}

impl SmoothField for PeriodicGaussian {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: Point) -> f64 {
        let mut v = 0.0;
        self.each(x, |_, e| v += e);
        v
    }
    fn gradient(&self, x: Point) -> Point {
        let w2 = self.width * self.width;
        let mut g = [0.0; 2];
        self.each(x, |y, e| {
            g[0] -= y[0] / w2 * e;
            g[1] -= y[1] / w2 * e;
        });
        g
    }
    fn hessian(&self, x: Point) -> Hessian {
        let w2 = self.width * self.width;
        let mut h = [[0.0; 2]; 2];
        self.each(x, |y, e| {
            for i in 0..2 {
                for j in 0..2 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    h[i][j] += (y[i] * y[j] / (w2 * w2) - delta / w2) * e;
                }
            }
        });
        if self.dim == 1 {
            h[0][1] = 0.0;
            h[1][0] = 0.0;
            h[1][1] = 0.0;
        }
        h
    }
    fn period(&self) -> Option<f64> {
        self.period
    }
}

/// Compactly supported C^∞ bump `exp(1 - 1/(1 - |x-c|²/ρ²))` with peak 1.
pub struct SmoothBump {
    pub dim: usize,
    pub center: Point,
    pub radius: f64,
    pub period: Option<f64>,
    shifts: Vec<[f64; 2]>,
}

impl SmoothBump {
    pub fn new(dim: usize, center: Point, radius: f64, period: Option<f64>) -> Self {
        let shifts = match period {
            Some(_) => images(dim, 1),
            None => vec![[0.0, 0.0]],
        };
        SmoothBump {
            dim,
            center,
            radius,
            period,
            shifts,
        }
    }

    /// Calls `f(y, b, b_q, b_qq)` for every image with `q = |y|²/ρ² < 1`.
    fn each<F: FnMut([f64; 2], f64, f64, f64)>(&self, x: Point, mut f: F) {
        let p = self.period.unwrap_or(0.0);
        let r2 = self.radius * self.radius;
        for s in &self.shifts {
            let y0 = x[0] - self.center[0] + s[0] * p;
            let y1 = if self.dim == 2 { x[1] - self.center[1] + s[1] * p } else { 0.0 };
            let q = (y0 * y0 + y1 * y1) / r2;
            if q < 1.0 {
                let u = 1.0 / (1.0 - q);
                let b = (1.0 - u).exp();
                let g1 = -u * u;
                let g2 = -2.0 * u * u * u;
                f([y0, y1], b, b * g1, b * (g1 * g1 + g2));
            }
        }
    }
}

impl SmoothField for SmoothBump {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: Point) -> f64 {
        let mut v = 0.0;
        self.each(x, |_, b, _, _| v += b);
        v
    }
    fn gradient(&self, x: Point) -> Point {
        let r2 = self.radius * self.radius;
        let mut g = [0.0; 2];
        self.each(x, |y, _, bq, _| {
            g[0] += bq * 2.0 * y[0] / r2;
            g[1] += bq * 2.0 * y[1] / r2;
        });
        g
    }
    fn hessian(&self, x: Point) -> Hessian {
        let r2 = self.radius * self.radius;
        let mut h = [[0.0; 2]; 2];
        self.each(x, |y, _, bq, bqq| {
            for i in 0..2 {
                for j in 0..2 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    h[i][j] += bqq * 4.0 * y[i] * y[j] / (r2 * r2) + bq * 2.0 * delta / r2;
                }
            }
        });
        if self.dim == 1 {
            h[0][1] = 0.0;
            h[1][0] = 0.0;
            h[1][1] = 0.0;
        }
        h
    }
    fn period(&self) -> Option<f64> {
        self.period
    }
}

/// `cos(k·x)`.
pub struct CosineField {
    pub dim: usize,
    pub wave: Point,
    pub period: Option<f64>,
}

impl SmoothField for CosineField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: Point) -> f64 {
        (self.wave[0] * x[0] + self.wave[1] * x[1]).cos()
    }
    fn gradient(&self, x: Point) -> Point {
        let s = -(self.wave[0] * x[0] + self.wave[1] * x[1]).sin();
        [s * self.wave[0], s * self.wave[1]]
    }
    fn hessian(&self, x: Point) -> Hessian {
        let c = -(self.wave[0] * x[0] + self.wave[1] * x[1]).cos();
        let k = self.wave;
        [[c * k[0] * k[0], c * k[0] * k[1]], [c * k[1] * k[0], c * k[1] * k[1]]]
    }
    fn period(&self) -> Option<f64> {
        self.period
    }
}

/// Periodic cubic spline through the values of a one-dimensional grid field.
pub struct SplineField {
    y: Vec<f64>,
    m: Vec<f64>,
    h: f64,
    half_width: f64,
}

impl SplineField {
    pub fn new(phi: &GridFunction) -> Result<Self> {
        let g = phi.grid;
        if g.dim != 1 {
            return Err(Error::Unsupported("spline interpolation is one-dimensional".into()));
        }
        let h = g.spacing();
        let n = g.points;
        // circulant system M_{j-1} + 4 M_j + M_{j+1} = 6 (y_{j+1} - 2 y_j + y_{j-1}) / h²
        let m = crate::grid::spectral::fourier_multiply(&g, &phi.values, |k| {
            let c = (k[0] * h).cos();
            Ok(Complex64::new(6.0 * (2.0 * c - 2.0) / (h * h * (4.0 + 2.0 * c)), 0.0))
        })?;
        debug_assert_eq!(m.len(), n);
        Ok(SplineField {
            y: phi.values.clone(),
            m,
            h,
            half_width: g.half_width,
        })
    }

    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.y.len();
        let p = 2.0 * self.half_width;
        let s = (x + self.half_width).rem_euclid(p) / self.h;
        let i = (s.floor() as usize).min(n - 1);
        let t = s - i as f64;
        (i, (i + 1) % n, t)
    }
}

impl SmoothField for SplineField {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: Point) -> f64 {
        let (i, j, t) = self.locate(x[0]);
        let u = 1.0 - t;
        u * self.y[i] + t * self.y[j] + self.h * self.h / 6.0 * ((u * u * u - u) * self.m[i] + (t * t * t - t) * self.m[j])
    }
    fn gradient(&self, x: Point) -> Point {
        let (i, j, t) = self.locate(x[0]);
        let u = 1.0 - t;
        let d = (self.y[j] - self.y[i]) / self.h
            + self.h / 6.0 * (-(3.0 * u * u - 1.0) * self.m[i] + (3.0 * t * t - 1.0) * self.m[j]);
        [d, 0.0]
    }
    fn hessian(&self, x: Point) -> Hessian {
        let (i, j, t) = self.locate(x[0]);
        [[(1.0 - t) * self.m[i] + t * self.m[j], 0.0], [0.0, 0.0]]
    }
    fn period(&self) -> Option<f64> {
        Some(2.0 * self.half_width)
    }
}
