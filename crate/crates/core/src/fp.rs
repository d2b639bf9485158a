//! Forward equation `∂t m = (L^ε)*(b m)` and its dual `∂t w + b L^ε w = 0`.
//!
//! One substep of length `ds` on `[t_n, t_{n+1})` is
//!
//! ```text
//! m ← m (1 - ds b W) + ds Σ_j w_j (b m)(· - o_j)        (forward)
//! w ← w + ds b L^ε w                                    (dual, backward)
//! ```
//!
//! The two maps are transposes of each other, so `⟨m, w⟩` is constant along
//! a forward/dual pair run with the same substeps.

use crate::check::{CheckReport, CheckRow};
use crate::grid::{GridFunction, GridSpec, ProbabilityVector};
use crate::hjb::ControlField;
use crate::levy::{DiscreteLevyOp, LyapunovFn, SmoothField};
use crate::special::sphere_area;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTrajectory {
    pub grid: GridSpec,
    /// `m[n]` at `t_n`, `n = 0..=M`.
    pub m: Vec<ProbabilityVector>,
    pub dt: f64,
    pub substeps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualTrajectory {
    /// `w[n]` at `t_n`, `n = 0..=n0`, with `w[n0] = φ`.
    pub w: Vec<GridFunction>,
    pub substeps: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpOptions {
    /// Multiplies the minimal substep count of every macro step.
    pub substep_factor: usize,
    pub positivity_tol: f64,
    pub mass_tol: f64,
}

impl Default for FpOptions {
    fn default() -> Self {
        FpOptions {
            substep_factor: 1,
            positivity_tol: 1e-14,
            mass_tol: 1e-10,
        }
    }
}

/// Substeps on `[t_n, t_{n+1})` so that `ds ‖b^n‖∞ W ≤ 1`.
pub fn substep_count(dt: f64, b_max: f64, total_mass: f64, factor: usize) -> usize {
    let s = (dt * b_max * total_mass * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    s * factor.max(1)
}

fn check_inputs(b: &ControlField, op: &DiscreteLevyOp, grid: &GridSpec) -> Result<()> {
    grid.validate()?;
    grid.check_same_space(op.grid())?;
    if b.b.len() != grid.steps + 1 {
        return Err(Error::InvalidInput(format!(
            "control field has {} slices; expected {}",
            b.b.len(),
            grid.steps + 1
        )));
    }
    for s in &b.b {
        grid.check_same_space(&s.grid)?;
    }
    if b.min < 0.0 {
        return Err(Error::InvalidInput("control field must be nonnegative".into()));
    }
    Ok(())
}

pub fn solve_fp(m0: &ProbabilityVector, b: &ControlField, op: &DiscreteLevyOp, grid: &GridSpec) -> Result<MeasureTrajectory> {
    solve_fp_with(m0, b, op, grid, &FpOptions::default())
}

pub fn solve_fp_with(
    m0: &ProbabilityVector,
    b: &ControlField,
    op: &DiscreteLevyOp,
    grid: &GridSpec,
    opts: &FpOptions,
) -> Result<MeasureTrajectory> {
    check_inputs(b, op, grid)?;
    grid.check_same_space(&m0.grid)?;
    let steps = grid.steps;
    let dt = grid.dt();
    let w = op.total_mass();
    let len = grid.len();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(m0.clone());
    let mut substeps = Vec::with_capacity(steps);
    let mut cur = m0.weights.clone();
    let mut q = vec![0.0; len];
    let mut g = vec![0.0; len];
    for n in 0..steps {
        let bn = &b.b[n].values;
        let s = substep_count(dt, b.b[n].max(), w, opts.substep_factor);
        let ds = dt / s as f64;
        for _ in 0..s {
            for i in 0..len {
                q[i] = bn[i] * cur[i];
            }
            op.gather_adjoint(&q, &mut g);
            for i in 0..len {
                cur[i] = cur[i] * (1.0 - ds * bn[i] * w) + ds * g[i];
            }
        }
        substeps.push(s);
        let min = cur.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -opts.positivity_tol {
            return Err(Error::Cfl {
                step: n,
                detail: format!("density reached {min}"),
            });
        }
        let mass: f64 = cur.iter().sum();
        if (mass - 1.0).abs() > opts.mass_tol {
            return Err(Error::Conservation { step: n, drift: mass - 1.0 });
        }
        out.push(ProbabilityVector::from_vec_unchecked(*grid, cur.clone()));
    }
    Ok(MeasureTrajectory {
        grid: *grid,
        m: out,
        dt,
        substeps,
    })
}

/// Solves the dual equation backward from `w(t_{n0}) = φ`.
pub fn solve_dual(phi: &GridFunction, b: &ControlField, op: &DiscreteLevyOp, n0: usize) -> Result<DualTrajectory> {
    solve_dual_with(phi, b, op, n0, &FpOptions::default())
}

pub fn solve_dual_with(phi: &GridFunction, b: &ControlField, op: &DiscreteLevyOp, n0: usize, opts: &FpOptions) -> Result<DualTrajectory> {
    let grid = phi.grid;
    check_inputs(b, op, &grid)?;
    if n0 > grid.steps {
        return Err(Error::InvalidInput(format!("slice {n0} beyond the horizon ({} steps)", grid.steps)));
    }
    let dt = grid.dt();
    let w_mass = op.total_mass();
    let len = grid.len();
    let mut w = vec![GridFunction::zeros(grid); n0 + 1];
    let mut substeps = vec![0; n0];
    w[n0] = phi.clone();
    let mut cur = phi.values.clone();
    let mut lw = vec![0.0; len];
    for n in (0..n0).rev() {
        let bn = &b.b[n].values;
        let s = substep_count(dt, b.b[n].max(), w_mass, opts.substep_factor);
        let ds = dt / s as f64;
        for _ in 0..s {
            op.apply_slice(&cur, &mut lw);
            for i in 0..len {
                cur[i] += ds * bn[i] * lw[i];
            }
        }
        substeps[n] = s;
        w[n] = GridFunction::from_vec_unchecked(grid, cur.clone());
    }
    Ok(DualTrajectory { w, substeps })
}

/// Uniqueness residual: for each test function `φ`, the row
/// `|(m₁ - m₂)(t_{n0})[φ]| ≤ bound`, and the duality row
/// `|m₁(t_{n0})[φ] - m₁(0)[w(0)]|`, where `w` solves the dual equation from
/// `φ` with the substeps of `traj1`.
pub fn holmgren_residual(
    traj1: &MeasureTrajectory,
    traj2: &MeasureTrajectory,
    b: &ControlField,
    op: &DiscreteLevyOp,
    phis: &[GridFunction],
    n0: usize,
    bound: f64,
) -> Result<CheckReport> {
    traj1.grid.check_same_space(&traj2.grid)?;
    if n0 >= traj1.m.len() || n0 >= traj2.m.len() {
        return Err(Error::InvalidInput(format!("slice {n0} beyond the trajectories")));
    }
    let opts = FpOptions {
        substep_factor: infer_factor(traj1, b, op),
        ..FpOptions::default()
    };
    let mut rep = CheckReport::default();
    for (k, phi) in phis.iter().enumerate() {
        let dual = solve_dual_with(phi, b, op, n0, &opts)?;
        let end1 = traj1.m[n0].pair(phi);
        let gap = end1 - traj2.m[n0].pair(phi);
        rep.push(CheckRow::new(format!("holmgren_phi{k}"), Some(n0), bound, gap.abs()));
        let drift = end1 - traj1.m[0].pair(&dual.w[0]);
        rep.push(CheckRow::new(
            format!("duality_phi{k}"),
            Some(n0),
            1e-12 * (1.0 + phi.sup_norm()),
            drift.abs(),
        ));
    }
    Ok(rep)
}

/// The substep factor a trajectory was run with.
fn infer_factor(traj: &MeasureTrajectory, b: &ControlField, op: &DiscreteLevyOp) -> usize {
    match traj.substeps.first() {
        Some(&s) => {
            let base = substep_count(traj.dt, b.b[0].max(), op.total_mass(), 1);
            (s / base).max(1)
        }
        None => 1,
    }
}

/// Rows `m(t_n)[V] ≤ m(0)[V] + t_n ‖b‖∞ ‖L^ε V‖∞ + tol`, with `V` sampled on
/// the grid and `L^ε V` computed by the stencil of the flow.
pub fn tightness_report(traj: &MeasureTrajectory, b: &ControlField, op: &DiscreteLevyOp, v: &LyapunovFn, tol: f64) -> Result<CheckReport> {
    let grid = traj.grid;
    let vg = GridFunction::from_fn(grid, |x| v.value(x));
    let lv = op.apply(&vg)?.sup_norm();
    let bmax = b.max.abs();
    let m0v = traj.m[0].pair(&vg);
    let mut rep = CheckReport::default();
    for (n, m) in traj.m.iter().enumerate() {
        let t = grid.time(n);
        rep.push(CheckRow::new("tightness", Some(n), m0v + t * bmax * lv + tol, m.pair(&vg)));
    }
    Ok(rep)
}

/// Rows `‖m(t) - m(s)‖₀ ≤ (2 + (2√T + K_d)‖b‖∞ ‖L^ε‖_LK) √|t-s| + tol` for
/// the pairs `(0, t_n)` and consecutive slices, `K_d` the area of the unit
/// sphere.
pub fn equicontinuity_report(traj: &MeasureTrajectory, b: &ControlField, op: &DiscreteLevyOp, tol: f64) -> Result<CheckReport> {
    let grid = traj.grid;
    let c = 2.0 + (2.0 * grid.horizon.sqrt() + sphere_area(grid.dim)) * b.max.abs() * op.lk_norm();
    let mut rep = CheckReport::default();
    for n in 1..traj.m.len() {
        let from_start = crate::mfg::d0_distance(&traj.m[0], &traj.m[n])?;
        rep.push(CheckRow::new(
            "equicontinuity_start",
            Some(n),
            c * grid.time(n).sqrt() + tol,
            from_start,
        ));
        let step = crate::mfg::d0_distance(&traj.m[n - 1], &traj.m[n])?;
        rep.push(CheckRow::new("equicontinuity_step", Some(n), c * traj.dt.sqrt() + tol, step));
    }
    Ok(rep)
}

/// Rows `|Σ m(t_n) - 1| ≤ mass_tol` and `-min m(t_n) ≤ positivity_tol`.
pub fn conservation_report(traj: &MeasureTrajectory, opts: &FpOptions) -> CheckReport {
    let mut rep = CheckReport::default();
    for (n, m) in traj.m.iter().enumerate() {
        rep.push(CheckRow::new("mass", Some(n), opts.mass_tol, (m.mass() - 1.0).abs()));
        rep.push(CheckRow::new("positivity", Some(n), opts.positivity_tol, -m.min()));
    }
    rep
}
