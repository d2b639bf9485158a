//! Periodic grids on the torus `[-R, R)^d`, fields and probability vectors.

mod io;
pub(crate) mod spectral;

pub use io::{read_binary, read_csv, write_binary, write_csv, BinaryHeader};
pub use spectral::{frequencies, spectral_apply, spectral_reference};

use crate::{Error, Point, Result};

/// Discretization of `[0, T] × [-R, R)^d` with `N` points per axis and `M` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub horizon: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, points: usize, horizon: f64, steps: usize) -> Result<Self> {
        let g = GridSpec {
            dim,
            half_width,
            points,
            horizon,
            steps,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidGrid("half-width must be positive".into()));
        }
        if self.points < 4 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 4, got {}", self.points)));
        }
        if self.spacing() >= 1.0 {
            return Err(Error::InvalidGrid(format!("spacing {} must be < 1", self.spacing())));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) || self.steps == 0 {
            return Err(Error::InvalidGrid("horizon must be positive and steps >= 1".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Number of cells, `N^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.horizon * n as f64 / self.steps as f64
    }

    /// Per-axis indices of a flat index (axis 0 is the slow index).
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.points, idx % self.points]
        }
    }

    pub fn flat(&self, i: [usize; 2]) -> usize {
        if self.dim == 1 {
            i[0]
        } else {
            i[0] * self.points + i[1]
        }
    }

    pub fn coord(&self, idx: usize) -> Point {
        let h = self.spacing();
        let m = self.multi_index(idx);
        let x0 = -self.half_width + m[0] as f64 * h;
        if self.dim == 1 {
            [x0, 0.0]
        } else {
            [x0, -self.half_width + m[1] as f64 * h]
        }
    }

    /// Index of the node nearest to `x` after periodic reduction.
    pub fn nearest_index(&self, x: Point) -> usize {
        let h = self.spacing();
        let n = self.points as i64;
        let axis = |v: f64| -> usize { (((v + self.half_width) / h).round() as i64).rem_euclid(n) as usize };
        if self.dim == 1 {
            axis(x[0])
        } else {
            self.flat([axis(x[0]), axis(x[1])])
        }
    }

    /// Same spatial discretization (time data may differ).
    pub fn same_space(&self, other: &GridSpec) -> bool {
        self.dim == other.dim && self.points == other.points && self.half_width == other.half_width
    }

    pub fn check_same_space(&self, other: &GridSpec) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Periodic distance between two points of the torus.
    pub fn torus_distance(&self, x: Point, y: Point) -> f64 {
        let p = self.period();
        let red = |d: f64| {
            let r = d.rem_euclid(p);
            r.min(p - r)
        };
        let a = red(x[0] - y[0]);
        if self.dim == 1 {
            a
        } else {
            a.hypot(red(x[1] - y[1]))
        }
    }
}

/// A real field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at index {i}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        GridFunction { grid, values }
    }

    pub fn from_fn<F: Fn(Point) -> f64>(grid: GridSpec, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coord(i))).collect();
        GridFunction { grid, values }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        GridFunction {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `sup |self - other|`.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Cell masses of a probability measure on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    pub grid: GridSpec,
    pub weights: Vec<f64>,
}

impl ProbabilityVector {
    /// Validates nonnegativity and unit mass to within `1e-12`.
    pub fn new(grid: GridSpec, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} weights, got {}", grid.len(), weights.len())));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput(format!("weight {i} is negative or non-finite: {}", weights[i])));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("total mass {mass} is not 1")));
        }
        Ok(ProbabilityVector { grid, weights })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, weights: Vec<f64>) -> Self {
        ProbabilityVector { grid, weights }
    }

    /// Normalizes nonnegative masses to unit total.
    pub fn normalized(grid: GridSpec, mut weights: Vec<f64>) -> Result<Self> {
        let mass: f64 = weights.iter().sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero or non-finite measure".into()));
        }
        for w in &mut weights {
            *w /= mass;
        }
        Self::new(grid, weights)
    }

    pub fn uniform(grid: GridSpec) -> Self {
        let n = grid.len();
        ProbabilityVector {
            grid,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn dirac(grid: GridSpec, index: usize) -> Result<Self> {
        if index >= grid.len() {
            return Err(Error::InvalidInput(format!("dirac index {index} out of range")));
        }
        let mut w = vec![0.0; grid.len()];
        w[index] = 1.0;
        Ok(ProbabilityVector { grid, weights: w })
    }

    /// Periodized Gaussian with the given center and standard deviation.
    pub fn gaussian(grid: GridSpec, center: Point, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidInput("gaussian width must be positive".into()));
        }
        let c = center;
        let w = (0..grid.len())
            .map(|i| {
                let d = grid.torus_distance(grid.coord(i), c);
                (-0.5 * d * d / (width * width)).exp()
            })
            .collect();
        Self::normalized(grid, w)
    }

    /// Convex combination `Σ λ_i μ_i` with `λ` normalized.
    pub fn mixture(parts: &[(f64, ProbabilityVector)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let grid = first.1.grid;
        let mut w = vec![0.0; grid.len()];
        for (lam, p) in parts {
            grid.check_same_space(&p.grid)?;
            if !(*lam >= 0.0) {
                return Err(Error::InvalidInput("mixture weights must be nonnegative".into()));
            }
            for (a, b) in w.iter_mut().zip(&p.weights) {
                *a += lam * b;
            }
        }
        Self::normalized(grid, w)
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `μ[φ] = Σ μ_i φ_i`.
    pub fn pair(&self, phi: &GridFunction) -> f64 {
        self.weights.iter().zip(&phi.values).map(|(a, b)| a * b).sum()
    }

    /// `(1-λ) self + λ other`.
    pub fn blend(&self, other: &ProbabilityVector, lambda: f64) -> Self {
        ProbabilityVector {
            grid: self.grid,
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
                .collect(),
        }
    }

    /// View of the masses as a grid field.
    pub fn as_field(&self) -> GridFunction {
        GridFunction::from_vec_unchecked(self.grid, self.weights.clone())
    }
}
