//! Damped Picard iteration on measure trajectories.
//!
//! Given `mᵏ`, solve the backward equation with `f = 𝔣(mᵏ(t))`,
//! `g = 𝔤(mᵏ(T))`, set `b = F'(L^ε u)`, solve the forward equation from `m0`
//! to get `m̃`, and move to `mᵏ⁺¹ = (1-λ)mᵏ + λm̃`. The first update is
//! undamped. `λ` is halved whenever the residual `sup_t d0(m̃(t), mᵏ(t))`
//! grows.

use crate::fp::{solve_fp_with, FpOptions, MeasureTrajectory};
use crate::grid::{GridFunction, GridSpec, ProbabilityVector};
use crate::hamiltonian::Hamiltonian;
use crate::hjb::{control_field, solve_hjb_with, ControlField, HjbOptions, ValueTrajectory};
use crate::levy::DiscreteLevyOp;
use crate::mfg::coupling::Coupling;
use crate::mfg::metric::d0_trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MfgProblem {
    pub grid: GridSpec,
    pub op: DiscreteLevyOp,
    pub hamiltonian: Hamiltonian,
    pub running: Coupling,
    pub terminal: Coupling,
    pub m0: ProbabilityVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub damping: f64,
    pub min_damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            damping: 0.5,
            min_damping: 1.0 / 1024.0,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfgSolution {
    pub u: ValueTrajectory,
    pub m: MeasureTrajectory,
    pub b: ControlField,
    pub iterations: usize,
    /// `sup_t d0(m̃(t), mᵏ(t))` per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// `𝔣(m)` slices and `𝔤(m(T))` the value function was computed with.
    pub running_cost: Vec<GridFunction>,
    pub terminal_cost: GridFunction,
}

impl MfgSolution {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

impl MfgProblem {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.hamiltonian.require_differentiable()?;
        for g in [self.op.grid(), &self.running.grid, &self.terminal.grid, &self.m0.grid] {
            self.grid.check_same_space(g)?;
        }
        Ok(())
    }

    fn couplings_are_constant(&self) -> bool {
        self.running.is_zero() && self.terminal.is_zero()
    }

    /// One application of the best-response map: returns `(u, b, m̃)` and
    /// the data `(f, g)` used.
    pub fn best_response(&self, m: &[ProbabilityVector]) -> Result<(ValueTrajectory, ControlField, MeasureTrajectory, Vec<GridFunction>, GridFunction)> {
        if m.len() != self.grid.steps + 1 {
            return Err(Error::InvalidInput(format!(
                "measure trajectory has {} slices; expected {}",
                m.len(),
                self.grid.steps + 1
            )));
        }
        let f = m.iter().map(|s| self.running.eval(s)).collect::<Result<Vec<_>>>()?;
        let g = self.terminal.eval(&m[self.grid.steps])?;
        let u = solve_hjb_with(&g, &f, &self.hamiltonian, &self.op, &self.grid, &HjbOptions::default())?;
        let b = control_field(&u, &self.hamiltonian)?;
        let mt = solve_fp_with(&self.m0, &b, &self.op, &self.grid, &FpOptions::default())?;
        Ok((u, b, mt, f, g))
    }
}

/// `sup_t d0(Φ(m)(t), m(t))` for the best-response map `Φ`.
pub fn fixed_point_defect(problem: &MfgProblem, m: &[ProbabilityVector]) -> Result<f64> {
    let (_, _, mt, _, _) = problem.best_response(m)?;
    d0_trajectory(&mt.m, m)
}

/// Runs the iteration from the trajectory `init` (`M+1` slices, or one slice
/// held constant in time).
///
/// Hitting `max_iter` is not an error: the result has `converged = false`.
pub fn solve_mfg(problem: &MfgProblem, init: &[ProbabilityVector], cfg: &SolverConfig) -> Result<MfgSolution> {
    problem.validate()?;
    if !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(Error::InvalidInput(format!("damping {} must lie in (0,1]", cfg.damping)));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be positive".into()));
    }
    let steps = problem.grid.steps;
    let mut m: Vec<ProbabilityVector> = match init.len() {
        1 => vec![init[0].clone(); steps + 1],
        n if n == steps + 1 => init.to_vec(),
        n => {
            return Err(Error::InvalidInput(format!("initial trajectory has {n} slices; expected 1 or {}", steps + 1)));
        }
    };
    for s in &m {
        problem.grid.check_same_space(&s.grid)?;
    }
    let mut lambda = cfg.damping;
    let mut residuals = Vec::new();
    let mut k = 0;
    loop {
        k += 1;
        let (u, b, mt, f, g) = problem.best_response(&m)?;
        let r = d0_trajectory(&mt.m, &m)?;
        if let Some(&prev) = residuals.last() {
            if r > prev {
                lambda = (0.5 * lambda).max(cfg.min_damping);
            }
        }
        residuals.push(r);
        // with m-independent data the best response is the fixed point
        let done = r <= cfg.tol || (problem.couplings_are_constant() && k == 1);
        if done || k >= cfg.max_iter {
            let converged = done;
            if problem.couplings_are_constant() && k == 1 {
                residuals.push(0.0);
            }
            return Ok(MfgSolution {
                u,
                m: mt,
                b,
                iterations: k,
                residuals,
                converged,
                running_cost: f,
                terminal_cost: g,
            });
        }
        let step = if k == 1 { 1.0 } else { lambda };
        m = m.iter().zip(&mt.m).map(|(a, b)| a.blend(b, step)).collect();
    }
}
