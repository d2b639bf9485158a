//! Backward solver for `-∂t u = F(L^ε u) + f`, `u(T) = g`.
//!
//! Each macro step `t_{n+1} → t_n` takes `s` explicit substeps
//! `u ← u + (dt/s)(F(L^ε u) + f^{n+1})`, with `s` chosen so that
//! `(dt/s) F'(max L^ε u) W ≤ 1` (`W` the stencil mass). Under that bound the
//! step is monotone and commutes with adding constants.

use crate::check::{CheckReport, CheckRow};
use crate::grid::{GridFunction, GridSpec};
use crate::hamiltonian::Hamiltonian;
use crate::levy::{holder_seminorm, DiscreteLevyOp, LevyTriplet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTrajectory {
    pub grid: GridSpec,
    /// `u[n]` at `t_n = n dt`, `n = 0..=M`.
    pub u: Vec<GridFunction>,
    /// `L^ε u[n]`.
    pub lu: Vec<GridFunction>,
    pub dt: f64,
    /// Substeps used on `[t_n, t_{n+1}]`.
    pub substeps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    /// `b[n] = F'(L^ε u[n])`, used on `[t_n, t_{n+1})`.
    pub b: Vec<GridFunction>,
    pub min: f64,
    pub max: f64,
}

impl ControlField {
    /// Time-independent field, for running the forward equation alone.
    pub fn constant(grid: GridSpec, value: f64) -> Self {
        ControlField {
            b: vec![GridFunction::constant(grid, value); grid.steps + 1],
            min: value,
            max: value,
        }
    }

    pub fn from_slices(b: Vec<GridFunction>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidInput("control field without slices".into()));
        }
        let min = b.iter().map(GridFunction::min).fold(f64::INFINITY, f64::min);
        let max = b.iter().map(GridFunction::max).fold(f64::NEG_INFINITY, f64::max);
        if min < 0.0 {
            return Err(Error::InvalidInput(format!("control field takes the negative value {min}")));
        }
        Ok(ControlField { b, min, max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HjbOptions {
    /// Give up when a macro step needs more substeps than this.
    pub max_substeps: usize,
    /// Relative slack of the sup-norm blow-up test.
    pub slack: f64,
}

impl Default for HjbOptions {
    fn default() -> Self {
        HjbOptions {
            max_substeps: 1 << 22,
            slack: 1e-8,
        }
    }
}

/// Slice `n` of time-indexed data given as `M+1` slices or one constant slice.
pub(crate) fn slice(data: &[GridFunction], n: usize) -> &GridFunction {
    if data.len() == 1 {
        &data[0]
    } else {
        &data[n]
    }
}

pub(crate) fn check_slices(data: &[GridFunction], grid: &GridSpec, what: &str) -> Result<()> {
    if data.len() != 1 && data.len() != grid.steps + 1 {
        return Err(Error::InvalidInput(format!(
            "{what} has {} slices; expected 1 or {}",
            data.len(),
            grid.steps + 1
        )));
    }
    for d in data {
        grid.check_same_space(&d.grid)?;
    }
    Ok(())
}

pub fn solve_hjb(g: &GridFunction, f: &[GridFunction], h: &Hamiltonian, op: &DiscreteLevyOp, grid: &GridSpec) -> Result<ValueTrajectory> {
    solve_hjb_with(g, f, h, op, grid, &HjbOptions::default())
}

pub fn solve_hjb_with(
    g: &GridFunction,
    f: &[GridFunction],
    h: &Hamiltonian,
    op: &DiscreteLevyOp,
    grid: &GridSpec,
    opts: &HjbOptions,
) -> Result<ValueTrajectory> {
    grid.validate()?;
    h.require_differentiable()?;
    grid.check_same_space(op.grid())?;
    grid.check_same_space(&g.grid)?;
    check_slices(f, grid, "running cost")?;
    let m = grid.steps;
    let dt = grid.dt();
    let w = op.total_mass();
    let len = grid.len();
    let f_sup = f.iter().map(GridFunction::sup_norm).fold(0.0, f64::max);
    let g_sup = g.sup_norm();
    let f0 = h.value(0.0);

    let mut u = vec![GridFunction::zeros(*grid); m + 1];
    let mut lu = vec![GridFunction::zeros(*grid); m + 1];
    let mut substeps = vec![0; m];
    u[m] = g.clone();
    lu[m] = op.apply(g)?;

    let mut cur = vec![0.0; len];
    let mut lcur = vec![0.0; len];
    for n in (0..m).rev() {
        let fn1 = &slice(f, n + 1).values;
        let needed = |lmax: f64| dt * h.derivative(lmax) * w;
        let mut s = (needed(lu[n + 1].max()).ceil() as usize).max(1);
        'attempt: loop {
            if s > opts.max_substeps {
                return Err(Error::Cfl {
                    step: n,
                    detail: format!("more than {} substeps required", opts.max_substeps),
                });
            }
            let ds = dt / s as f64;
            cur.copy_from_slice(&u[n + 1].values);
            lcur.copy_from_slice(&lu[n + 1].values);
            for k in 0..s {
                if k > 0 {
                    op.apply_slice(&cur, &mut lcur);
                }
                let lmax = lcur.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if ds * h.derivative(lmax) * w > 1.0 + 1e-12 {
                    s *= 2;
                    continue 'attempt;
                }
                for i in 0..len {
                    cur[i] += ds * (h.value(lcur[i]) + fn1[i]);
                }
            }
            break;
        }
        substeps[n] = s;
        let next = GridFunction::new(*grid, cur.clone())?;
        let t = grid.time(n);
        let tau = grid.horizon - t;
        let dev = next.values.iter().map(|v| (v - tau * f0).abs()).fold(0.0, f64::max);
        let limit = g_sup + tau * f_sup;
        if dev > limit + opts.slack * (1.0 + limit + tau * f0.abs()) {
            return Err(Error::Instability {
                time: t,
                bound: "‖u(t) - (T-t)F(0)‖∞ ≤ ‖g‖∞ + (T-t)‖f‖∞".into(),
                measured: dev,
                limit,
            });
        }
        lu[n] = op.apply(&next)?;
        u[n] = next;
    }
    Ok(ValueTrajectory {
        grid: *grid,
        u,
        lu,
        dt,
        substeps,
    })
}

/// `b = F'(L^ε u)` slice by slice.
pub fn control_field(traj: &ValueTrajectory, h: &Hamiltonian) -> Result<ControlField> {
    h.require_differentiable()?;
    let b: Vec<GridFunction> = traj.lu.iter().map(|l| l.map(|z| h.derivative(z))).collect();
    ControlField::from_slices(b)
}

/// Rows `‖u₁(t_n) - u₂(t_n)‖∞ ≤ (T-t_n)‖f₁-f₂‖∞ + ‖g₁-g₂‖∞ + tol`.
#[allow(clippy::too_many_arguments)]
pub fn comparison_check(
    traj1: &ValueTrajectory,
    traj2: &ValueTrajectory,
    f1: &[GridFunction],
    g1: &GridFunction,
    f2: &[GridFunction],
    g2: &GridFunction,
    tol: f64,
) -> Result<CheckReport> {
    traj1.grid.check_same_space(&traj2.grid)?;
    if traj1.u.len() != traj2.u.len() {
        return Err(Error::GridMismatch("trajectories with different step counts".into()));
    }
    let m = traj1.u.len() - 1;
    let mut fd: f64 = 0.0;
    for n in 0..=m {
        fd = fd.max(slice(f1, n).distance(slice(f2, n)));
    }
    let gd = g1.distance(g2);
    let mut rep = CheckReport::default();
    for n in 0..=m {
        let tau = traj1.grid.horizon - traj1.grid.time(n);
        rep.push(CheckRow::new(
            "comparison",
            Some(n),
            tau * fd + gd + tol,
            traj1.u[n].distance(&traj2.u[n]),
        ));
    }
    Ok(rep)
}

/// Rows `[u(t)]_α ≤ M(T-t+1) + tol_u` and
/// `[L^ε u(t)]_{α-2σ} ≤ 4(K/(α-2σ) + ν(B1ᶜ)) M(T-t+1) + tol_lu`.
pub fn holder_report(
    traj: &ValueTrajectory,
    triplet: &LevyTriplet,
    alpha: f64,
    data_bound: f64,
    tol_u: f64,
    tol_lu: f64,
) -> Result<CheckReport> {
    let dim = triplet.dim;
    let two_sigma = triplet
        .jump
        .la_exponent()
        .ok_or_else(|| Error::Unsupported("Hölder bounds need a measure with a small-jump exponent below 1".into()))?;
    if alpha <= two_sigma || alpha > 1.0 {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must lie in (2σ, 1] = ({two_sigma}, 1]")));
    }
    let k = triplet.jump.la_constant(dim, two_sigma)?;
    let tail = triplet.jump.mass_outside(dim, 1.0)?;
    let constant = 4.0 * (k / (alpha - two_sigma) + tail);
    let mut rep = CheckReport::default();
    for (n, (u, lu)) in traj.u.iter().zip(&traj.lu).enumerate() {
        let scale = data_bound * (traj.grid.horizon - traj.grid.time(n) + 1.0);
        rep.push(CheckRow::new("holder_u", Some(n), scale + tol_u, holder_seminorm(u, alpha)));
        rep.push(CheckRow::new(
            "holder_lu",
            Some(n),
            constant * scale + tol_lu,
            holder_seminorm(lu, alpha - two_sigma),
        ));
    }
    Ok(rep)
}
