//! Discrete duality identity between two solutions of the same problem.
//!
//! With `u = u₁ - u₂`, `v = L^ε u`, `v_i = L^ε u_i` and left-endpoint slices,
//!
//! ```text
//! LHS = (m₁-m₂)(T)[u(T)] - (m₁-m₂)(0)[u(0)]
//! RHS = Σ_n dt ( m₁ⁿ[∂t u + F'(v₁)v] - m₂ⁿ[∂t u + F'(v₂)v] ),  ∂t u = (uⁿ⁺¹-uⁿ)/dt
//! ```
//!
//! agree up to `O(dt)`. The report also carries the sign of the coupling
//! terms and the convexity gaps `F(v₁)-F(v₂)-F'(v_i)(v₁-v₂)`.

use crate::check::{CheckReport, CheckRow};
use crate::mfg::picard::{MfgProblem, MfgSolution};
use crate::Result;

/// `gap_bound` is the tolerance for `|LHS - RHS|`.
pub fn duality_residual(problem: &MfgProblem, sol1: &MfgSolution, sol2: &MfgSolution, gap_bound: f64) -> Result<CheckReport> {
    let grid = problem.grid;
    let h = &problem.hamiltonian;
    let steps = grid.steps;
    let dt = grid.dt();
    let (m1, m2) = (&sol1.m.m, &sol2.m.m);
    let (u1, u2) = (&sol1.u.u, &sol2.u.u);
    let (l1, l2) = (&sol1.u.lu, &sol2.u.lu);
    let len = grid.len();

    let pair_diff = |n: usize| -> f64 { (0..len).map(|i| (m1[n].weights[i] - m2[n].weights[i]) * (u1[n].values[i] - u2[n].values[i])).sum() };
    let lhs = pair_diff(steps) - pair_diff(0);

    let mut rhs = 0.0;
    let mut conv1: f64 = 0.0;
    let mut conv2: f64 = 0.0;
    let mut running: f64 = f64::NEG_INFINITY;
    for n in 0..steps {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for i in 0..len {
            let du = ((u1[n + 1].values[i] - u2[n + 1].values[i]) - (u1[n].values[i] - u2[n].values[i])) / dt;
            let (a, b) = (l1[n].values[i], l2[n].values[i]);
            let v = a - b;
            s1 += m1[n].weights[i] * (du + h.derivative(a) * v);
            s2 += m2[n].weights[i] * (du + h.derivative(b) * v);
        }
        rhs += dt * (s1 - s2);
    }
    for n in 0..=steps {
        for i in 0..len {
            let (a, b) = (l1[n].values[i], l2[n].values[i]);
            conv1 = conv1.min(h.value(a) - h.value(b) - h.derivative(b) * (a - b));
            conv2 = conv2.min(h.value(b) - h.value(a) - h.derivative(a) * (b - a));
        }
        let mono: f64 = (0..len)
            .map(|i| (sol1.running_cost[n].values[i] - sol2.running_cost[n].values[i]) * (m1[n].weights[i] - m2[n].weights[i]))
            .sum();
        running = running.max(mono);
    }
    let terminal: f64 = (0..len)
        .map(|i| (sol1.terminal_cost.values[i] - sol2.terminal_cost.values[i]) * (m1[steps].weights[i] - m2[steps].weights[i]))
        .sum();

    let mut rep = CheckReport::default();
    rep.push(CheckRow::new("duality_gap", None, gap_bound, (lhs - rhs).abs()));
    rep.push(CheckRow::new("duality_lhs", None, f64::INFINITY, lhs));
    rep.push(CheckRow::new("duality_rhs", None, f64::INFINITY, rhs));
    rep.push(CheckRow::new("running_monotonicity", None, 1e-12, running));
    rep.push(CheckRow::new("terminal_monotonicity", None, 1e-12, terminal));
    rep.push(CheckRow::new("convexity_gap_2", None, 1e-12, -conv1));
    rep.push(CheckRow::new("convexity_gap_1", None, 1e-12, -conv2));
    Ok(rep)
}
