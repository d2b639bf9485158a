//! Dispatch of a validated scenario: solves, checks and output files.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tcmfg_core::check::{CheckReport, CheckRow};
use tcmfg_core::fp::{conservation_report, equicontinuity_report, holmgren_residual, solve_dual_with, solve_fp_with, tightness_report, FpOptions, MeasureTrajectory};
use tcmfg_core::grid::{write_binary, GridFunction, GridSpec, ProbabilityVector};
use tcmfg_core::hamiltonian::conjugate_numeric;
use tcmfg_core::hjb::{comparison_check, control_field, holder_report, solve_hjb, ControlField, ValueTrajectory};
use tcmfg_core::levy::{default_log_lyapunov, holder_norm};
use tcmfg_core::mfg::{d0_trajectory, duality_residual, fixed_point_defect, solve_mfg, Coupling, MfgProblem};

use crate::report;
use crate::scenario::{CheckKind, Scenario};
use crate::validate::Built;
use crate::{CliError, Mode};

pub struct RunOutput {
    pub report: CheckReport,
    /// Output files in write order.
    pub files: Vec<(String, Vec<u8>)>,
    pub timings: Vec<(String, f64)>,
    /// Set when the fixed-point iteration stopped at its cap.
    pub diverged: Option<String>,
}

struct Timer {
    rows: Vec<(String, f64)>,
}

impl Timer {
    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.rows.push((label.to_string(), t0.elapsed().as_secs_f64()));
        out
    }
}

fn solver(context: &str) -> impl Fn(tcmfg_core::Error) -> CliError + '_ {
    move |e| CliError::Solver {
        context: context.to_string(),
        source: e,
    }
}

/// Five smooth periodic test functions for duality and Holmgren rows.
pub fn phi_family(grid: &GridSpec) -> Vec<GridFunction> {
    let k = std::f64::consts::PI / grid.half_width;
    let r = grid.half_width;
    let s = |x: [f64; 2]| if grid.dim == 2 { x[0] + 0.5 * x[1] } else { x[0] };
    let bump = move |x: [f64; 2], c: f64, w: f64| {
        let mut q = 0.0;
        for i in 0..grid.dim {
            let d = (x[i] - c + r).rem_euclid(2.0 * r) - r;
            q += d * d;
        }
        (-q / (2.0 * w * w)).exp()
    };
    vec![
        GridFunction::from_fn(*grid, move |x| (k * s(x)).cos()),
        GridFunction::from_fn(*grid, move |x| (2.0 * k * s(x)).sin()),
        GridFunction::from_fn(*grid, move |x| (k * s(x)).cos().exp() - 1.0),
        GridFunction::from_fn(*grid, move |x| bump(x, 0.0, 0.3 * r)),
        GridFunction::from_fn(*grid, move |x| bump(x, 0.5 * r, 0.15 * r) - 0.5 * (3.0 * k * s(x)).cos()),
    ]
}

fn binary(grid: &GridSpec, slices: &[&[f64]]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_binary(&mut buf, grid, slices).map_err(solver("writing binary output"))?;
    Ok(buf)
}

fn residuals_csv(res: &[f64]) -> String {
    let mut s = String::from("iteration,residual\n");
    for (i, r) in res.iter().enumerate() {
        s.push_str(&format!("{},{r:e}\n", i + 1));
    }
    s
}

/// `(ρ ⋆ μ)` by a direct periodic sum, the oracle for the FFT pairing.
fn direct_smooth(c: &Coupling, mu: &[f64]) -> Vec<f64> {
    let g = c.grid;
    let n = g.points;
    let rho = c.kernel();
    (0..g.len())
        .map(|i| {
            let a = g.multi_index(i);
            let mut s = 0.0;
            for (j, &m) in mu.iter().enumerate() {
                let b = g.multi_index(j);
                let o = [(a[0] + n - b[0]) % n, (a[1] + n - b[1]) % n];
                s += rho[g.flat(o)] * m;
            }
            s
        })
        .collect()
}

/// Rows `(𝔣(m₁)-𝔣(m₂))[m₁-m₂] ≤ 1e-12` and, on small grids, agreement
/// with `-s‖ρ⋆(m₁-m₂)‖²` computed by direct summation within `1e-10`.
pub fn monotonicity_rows(c: &Coupling, name: &str, pairs: usize, seed: u64) -> Result<CheckReport, CliError> {
    let g = c.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| -> Result<ProbabilityVector, CliError> {
        let w: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>().powi(3)).collect();
        ProbabilityVector::normalized(g, w).map_err(solver("sampling measures"))
    };
    let direct = g.len() <= 4096;
    let (mut worst, mut gap): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    for _ in 0..pairs {
        let m1 = sample(&mut rng)?;
        let m2 = sample(&mut rng)?;
        let f1 = c.eval(&m1).map_err(solver("coupling evaluation"))?;
        let f2 = c.eval(&m2).map_err(solver("coupling evaluation"))?;
        let pairing: f64 = (0..g.len())
            .map(|i| (f1.values[i] - f2.values[i]) * (m1.weights[i] - m2.weights[i]))
            .sum();
        worst = worst.max(pairing);
        if direct {
            let d: Vec<f64> = m1.weights.iter().zip(&m2.weights).map(|(a, b)| a - b).collect();
            let sm = direct_smooth(c, &d);
            let norm2 = g.cell_volume() * sm.iter().map(|v| v * v).sum::<f64>();
            gap = gap.max((pairing + c.strength * norm2).abs());
        }
    }
    let mut rep = CheckReport::default();
    rep.push(CheckRow::new(format!("coupling_monotone_{name}"), None, 1e-12, worst));
    if direct {
        rep.push(CheckRow::new(format!("coupling_plancherel_{name}"), None, 1e-10, gap));
    }
    Ok(rep)
}

fn conjugate_rows(s: &Scenario, b: &Built) -> Result<CheckReport, CliError> {
    let p = &s.params;
    let n = p.conjugate_samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let z = -5.0 + 10.0 * i as f64 / (n - 1) as f64;
        let num = conjugate_numeric(&s.gain, z, p.conjugate_step).map_err(solver("numerical conjugate"))?;
        worst = worst.max((num - b.hamiltonian.value(z)).abs());
    }
    let mut rep = CheckReport::default();
    rep.push(CheckRow::new("conjugate", None, p.conjugate_tol, worst));
    Ok(rep)
}

/// `max_t ‖f(t)‖_α + ‖g‖_α`.
fn data_bound(f: &[GridFunction], g: &GridFunction, alpha: f64) -> f64 {
    f.iter().map(|x| holder_norm(x, alpha)).fold(0.0, f64::max) + holder_norm(g, alpha)
}

fn hjb_rows(s: &Scenario, b: &Built, u: &ValueTrajectory, f: &[GridFunction], g: &GridFunction, t: &mut Timer) -> Result<CheckReport, CliError> {
    let mut rep = CheckReport::default();
    let grid = s.grid;
    if s.checks.contains(&CheckKind::Comparison) {
        let delta = s.params.comparison_delta;
        let tol = s.params.comparison_tol;
        let f2: Vec<GridFunction> = f.iter().map(|x| x.add_scalar(delta)).collect();
        let u2 = t.time("comparison", || solve_hjb(g, &f2, &b.hamiltonian, &b.op, &grid)).map_err(solver("perturbed backward solve"))?;
        rep.extend(comparison_check(u, &u2, f, g, &f2, g, tol).map_err(solver("comparison rows"))?);
        // adding a constant to f shifts u by δ(T-t) exactly, for every F
        for n in 0..=grid.steps {
            let expected = delta * (grid.horizon - grid.time(n));
            let d = u2.u[n].distance(&u.u[n]);
            rep.push(CheckRow::new("comparison_shift", Some(n), tol, (d - expected).abs()));
        }
    }
    if s.checks.contains(&CheckKind::Holder) {
        let m = data_bound(f, g, s.alpha);
        rep.extend(
            holder_report(u, &b.triplet, s.alpha, m, s.params.holder_tol_u, s.params.holder_tol_lu).map_err(solver("Hölder rows"))?,
        );
    }
    Ok(rep)
}

fn fp_rows(s: &Scenario, b: &Built, m: &MeasureTrajectory, ctrl: &ControlField, t: &mut Timer) -> Result<(CheckReport, Vec<(String, Vec<u8>)>), CliError> {
    let mut rep = CheckReport::default();
    let mut files = Vec::new();
    if s.checks.contains(&CheckKind::Conservation) {
        rep.extend(conservation_report(m, &FpOptions::default()));
    }
    if s.checks.contains(&CheckKind::Tightness) {
        let v = default_log_lyapunov(s.grid.dim);
        rep.extend(tightness_report(m, ctrl, &b.op, &v, s.params.tightness_tol).map_err(solver("tightness rows"))?);
    }
    if s.checks.contains(&CheckKind::Equicontinuity) {
        let r = t.time("equicontinuity", || equicontinuity_report(m, ctrl, &b.op, s.params.equicontinuity_tol));
        rep.extend(r.map_err(solver("equicontinuity rows"))?);
    }
    if s.checks.contains(&CheckKind::Holmgren) {
        let grid = s.grid;
        let n0 = s.params.holmgren_slice.unwrap_or(grid.steps / 2);
        let opts = FpOptions {
            substep_factor: s.params.holmgren_substep_factor,
            ..FpOptions::default()
        };
        let fine = t
            .time("holmgren", || solve_fp_with(&b.m0, ctrl, &b.op, &grid, &opts))
            .map_err(solver("refined forward solve"))?;
        if s.checks.contains(&CheckKind::Conservation) {
            rep.extend(conservation_report(&fine, &FpOptions::default()));
        }
        let phis = phi_family(&grid);
        let h = holmgren_residual(m, &fine, ctrl, &b.op, &phis, n0, s.params.holmgren_bound_factor * grid.dt())
            .map_err(solver("Holmgren rows"))?;
        files.push(("holmgren.csv".to_string(), report::to_csv(&h).into_bytes()));
        rep.extend(h);
    }
    Ok((rep, files))
}

fn common_rows(s: &Scenario, b: &Built) -> Result<CheckReport, CliError> {
    let mut rep = CheckReport::default();
    if s.checks.contains(&CheckKind::Monotonicity) {
        for (c, name) in [(&b.running, "running"), (&b.terminal, "terminal")] {
            if !c.is_zero() {
                rep.extend(monotonicity_rows(c, name, s.params.monotonicity_pairs, s.seed)?);
            }
        }
    }
    if s.checks.contains(&CheckKind::Conjugate) {
        rep.extend(conjugate_rows(s, b)?);
    }
    Ok(rep)
}

fn stencil_csv(b: &Built) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    b.op.write_csv(&mut buf).map_err(solver("stencil export"))?;
    Ok(buf)
}

/// Backward solve with the couplings frozen at `m0`.
fn frozen_hjb(s: &Scenario, b: &Built, t: &mut Timer) -> Result<(ValueTrajectory, Vec<GridFunction>, GridFunction), CliError> {
    let f = vec![b.running.eval(&b.m0).map_err(solver("running coupling"))?];
    let g = b.terminal.eval(&b.m0).map_err(solver("terminal coupling"))?;
    let u = t
        .time("hjb", || solve_hjb(&g, &f, &b.hamiltonian, &b.op, &s.grid))
        .map_err(solver("backward solve"))?;
    Ok((u, f, g))
}

fn frozen_control(s: &Scenario, b: &Built, t: &mut Timer) -> Result<ControlField, CliError> {
    match s.control {
        Some(v) => Ok(ControlField::constant(s.grid, v)),
        None => {
            let (u, _, _) = frozen_hjb(s, b, t)?;
            control_field(&u, &b.hamiltonian).map_err(solver("control field"))
        }
    }
}

fn slices(fs: &[GridFunction]) -> Vec<&[f64]> {
    fs.iter().map(|f| f.values.as_slice()).collect()
}

pub fn execute(s: &Scenario, b: &Built, mode: Mode) -> Result<RunOutput, CliError> {
    let mut t = Timer { rows: Vec::new() };
    let mut rep = CheckReport::default();
    let mut files: Vec<(String, Vec<u8>)> = vec![("stencil.csv".into(), stencil_csv(b)?)];
    let mut diverged = None;
    let grid = s.grid;
    match mode {
        Mode::Mfg => {
            let problem = MfgProblem {
                grid,
                op: b.op.clone(),
                hamiltonian: b.hamiltonian.clone(),
                running: b.running.clone(),
                terminal: b.terminal.clone(),
                m0: b.m0.clone(),
            };
            let sol = t
                .time("mfg", || solve_mfg(&problem, std::slice::from_ref(&b.init), &s.solver))
                .map_err(solver("fixed-point iteration"))?;
            if !sol.converged {
                diverged = Some(format!(
                    "fixed-point iteration stopped after {} iterations with residual {:e} > tol {:e}",
                    sol.iterations,
                    sol.residual(),
                    s.solver.tol
                ));
            }
            rep.push(CheckRow::new("picard_residual", None, s.solver.tol, sol.residual()));
            files.push(("residuals.csv".into(), residuals_csv(&sol.residuals).into_bytes()));
            rep.extend(hjb_rows(s, b, &sol.u, &sol.running_cost, &sol.terminal_cost, &mut t)?);
            let (r, f) = fp_rows(s, b, &sol.m, &sol.b, &mut t)?;
            rep.extend(r);
            files.extend(f);
            if s.checks.contains(&CheckKind::FixedPoint) {
                let d = t
                    .time("fixed_point", || fixed_point_defect(&problem, &sol.m.m))
                    .map_err(solver("fixed-point defect"))?;
                rep.push(CheckRow::new("fixed_point", None, s.params.fixed_point_factor * s.solver.tol, d));
            }
            if let (true, Some(init2)) = (s.checks.contains(&CheckKind::Uniqueness), &b.init2) {
                let sol2 = t
                    .time("mfg_second_run", || solve_mfg(&problem, std::slice::from_ref(init2), &s.solver))
                    .map_err(solver("second fixed-point iteration"))?;
                if !sol2.converged && diverged.is_none() {
                    diverged = Some(format!(
                        "second fixed-point iteration stopped after {} iterations with residual {:e}",
                        sol2.iterations,
                        sol2.residual()
                    ));
                }
                let mut u = CheckReport::default();
                u.push(CheckRow::new("picard_residual", Some(2), s.solver.tol, sol2.residual()));
                let gap = d0_trajectory(&sol.m.m, &sol2.m.m).map_err(solver("uniqueness gap"))?;
                u.push(CheckRow::new("uniqueness_gap", None, s.params.uniqueness_gap_factor * s.solver.tol, gap));
                u.extend(duality_residual(&problem, &sol, &sol2, s.params.duality_factor * grid.dt()).map_err(solver("duality rows"))?);
                if s.checks.contains(&CheckKind::Conservation) {
                    u.extend(conservation_report(&sol2.m, &FpOptions::default()));
                }
                files.push(("duality.csv".into(), report::to_csv(&u).into_bytes()));
                rep.extend(u);
            }
            let ms: Vec<&[f64]> = sol.m.m.iter().map(|p| p.weights.as_slice()).collect();
            files.push(("u.bin".into(), binary(&grid, &slices(&sol.u.u))?));
            files.push(("m.bin".into(), binary(&grid, &ms)?));
            files.push(("b.bin".into(), binary(&grid, &slices(&sol.b.b))?));
        }
        Mode::Hjb => {
            let (u, f, g) = frozen_hjb(s, b, &mut t)?;
            let ctrl = control_field(&u, &b.hamiltonian).map_err(solver("control field"))?;
            rep.extend(hjb_rows(s, b, &u, &f, &g, &mut t)?);
            files.push(("u.bin".into(), binary(&grid, &slices(&u.u))?));
            files.push(("b.bin".into(), binary(&grid, &slices(&ctrl.b))?));
        }
        Mode::Fp | Mode::Dual => {
            let ctrl = frozen_control(s, b, &mut t)?;
            let m = t
                .time("fp", || solve_fp_with(&b.m0, &ctrl, &b.op, &grid, &FpOptions::default()))
                .map_err(solver("forward solve"))?;
            let (r, f) = fp_rows(s, b, &m, &ctrl, &mut t)?;
            rep.extend(r);
            files.extend(f);
            if mode == Mode::Dual {
                let n0 = s.params.holmgren_slice.unwrap_or(grid.steps);
                let mut first = None;
                for (k, phi) in phi_family(&grid).iter().enumerate() {
                    let d = t
                        .time("dual", || solve_dual_with(phi, &ctrl, &b.op, n0, &FpOptions::default()))
                        .map_err(solver("dual solve"))?;
                    let drift = m.m[n0].pair(phi) - m.m[0].pair(&d.w[0]);
                    rep.push(CheckRow::new(format!("duality_phi{k}"), Some(n0), 1e-12 * (1.0 + phi.sup_norm()), drift.abs()));
                    first.get_or_insert(d);
                }
                if let Some(d) = first {
                    files.push(("w.bin".into(), binary(&grid, &slices(&d.w))?));
                }
            }
            let ms: Vec<&[f64]> = m.m.iter().map(|p| p.weights.as_slice()).collect();
            files.push(("m.bin".into(), binary(&grid, &ms)?));
            files.push(("b.bin".into(), binary(&grid, &slices(&ctrl.b))?));
        }
    }
    rep.extend(common_rows(s, b)?);
    Ok(RunOutput {
        report: rep,
        files,
        timings: t.rows,
        diverged,
    })
}
