//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines are printed whether or not output is captured.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use tcmfg_cli::run::{monotonicity_rows, phi_family};
use tcmfg_core::check::CheckReport;
use tcmfg_core::fp::{conservation_report, holmgren_residual, solve_fp, solve_fp_with, FpOptions, MeasureTrajectory};
use tcmfg_core::grid::{spectral_reference, GridFunction, GridSpec, ProbabilityVector};
use tcmfg_core::hamiltonian::{conjugate_numeric, GainFunction, Hamiltonian};
use tcmfg_core::hjb::{comparison_check, holder_report, solve_hjb, ControlField};
use tcmfg_core::levy::{
    apply_levy, build_epsilon_approx, construct_lyapunov, default_log_lyapunov, holder_norm, sup_on_points, LevyMeasureSpec, LevyTriplet,
    QuadratureConfig, SmoothBump,
};
use tcmfg_core::mfg::{d0_trajectory, duality_residual, solve_mfg, Coupling, MfgProblem, MfgSolution, SolverConfig};
use tcmfg_core::special::log_lyapunov_bound;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn failures(rep: &CheckReport) -> usize {
    rep.rows.iter().filter(|r| !r.pass()).count()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn stable(sigma: f64) -> LevyTriplet {
    LevyTriplet::pure_jump(1, LevyMeasureSpec::stable(sigma, 1.0)).unwrap()
}

// ---- shared runs -------------------------------------------------------

struct Linear {
    /// (steps, hjb error vs semi-discrete oracle, fp error vs semi-discrete oracle,
    ///  hjb error vs continuum, fp error vs continuum, dt + h + ε)
    rows: Vec<(usize, f64, f64, f64, f64, f64)>,
    fp_runs: Vec<MeasureTrajectory>,
}

fn linear() -> &'static Linear {
    static CELL: OnceLock<Linear> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = LevyTriplet::new(1, &[0.5], &[0.2], LevyMeasureSpec::stable(0.25, 1.0)).unwrap();
        let h = Hamiltonian::closed_form(GainFunction::IndicatorPoint { kappa: 1.0 }).unwrap();
        let eps = 0.125;
        let mut rows = Vec::new();
        let mut fp_runs = Vec::new();
        for steps in [400usize, 800] {
            let g = GridSpec::new(1, 4.0, 512, 1.0, steps).unwrap();
            let op = build_epsilon_approx(&t, eps, &g).unwrap();
            let semi = op.to_triplet().unwrap();
            let term = GridFunction::from_fn(g, |x| (-x[0] * x[0]).exp());
            let u = solve_hjb(&term, &[GridFunction::zeros(g)], &h, &op, &g).unwrap();
            let m0 = ProbabilityVector::gaussian(g, [0.5, 0.0], 0.4).unwrap();
            let fp = solve_fp(&m0, &ControlField::constant(g, 1.0), &op, &g).unwrap();
            let mf = GridFunction::new(g, m0.weights.clone()).unwrap();
            let (mut eh, mut ef, mut ch, mut cf) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for n in 0..=steps {
                let tau = g.horizon - g.time(n);
                eh = eh.max(u.u[n].distance(&spectral_reference(&semi, &term, tau, false).unwrap()));
                ch = ch.max(u.u[n].distance(&spectral_reference(&t, &term, tau, false).unwrap()));
                let s = g.time(n);
                ef = ef.max(l1(&fp.m[n].weights, &spectral_reference(&semi, &mf, s, true).unwrap().values));
                cf = cf.max(l1(&fp.m[n].weights, &spectral_reference(&t, &mf, s, true).unwrap().values));
            }
            rows.push((steps, eh, ef, ch, cf, g.dt() + g.spacing() + eps));
            fp_runs.push(fp);
        }
        Linear { rows, fp_runs }
    })
}

struct Uniqueness {
    problem: MfgProblem,
    cfg: SolverConfig,
    sol1: MfgSolution,
    sol2: MfgSolution,
}

fn uniqueness() -> &'static Uniqueness {
    static CELL: OnceLock<Uniqueness> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = GridSpec::new(1, 2.0, 256, 0.5, 100).unwrap();
        let op = build_epsilon_approx(&stable(0.1), 0.0625, &grid).unwrap();
        let problem = MfgProblem {
            grid,
            op,
            hamiltonian: Hamiltonian::closed_form(GainFunction::Power { q: 2.0 }).unwrap(),
            running: Coupling::gaussian(grid, 0.3, 1.0).unwrap(),
            terminal: Coupling::gaussian(grid, 0.3, 1.0).unwrap(),
            m0: ProbabilityVector::gaussian(grid, [0.0, 0.0], 0.3).unwrap(),
        };
        let cfg = SolverConfig {
            tol: 1e-6,
            max_iter: 200,
            ..SolverConfig::default()
        };
        let a = ProbabilityVector::uniform(grid);
        let b = ProbabilityVector::gaussian(grid, [1.0, 0.0], 0.2).unwrap();
        let sol1 = solve_mfg(&problem, &[a], &cfg).unwrap();
        let sol2 = solve_mfg(&problem, &[b], &cfg).unwrap();
        Uniqueness { problem, cfg, sol1, sol2 }
    })
}

fn holmgren_runs() -> &'static (MeasureTrajectory, MeasureTrajectory) {
    static CELL: OnceLock<(MeasureTrajectory, MeasureTrajectory)> = OnceLock::new();
    CELL.get_or_init(|| {
        let u = uniqueness();
        let p = &u.problem;
        let run = |factor: usize| {
            let opts = FpOptions {
                substep_factor: factor,
                ..FpOptions::default()
            };
            solve_fp_with(&p.m0, &u.sol1.b, &p.op, &p.grid, &opts).unwrap()
        };
        (run(1), run(2))
    })
}

// ---- criteria ----------------------------------------------------------

fn c1_conjugates() -> Verdict {
    let rows = [
        ("point", GainFunction::IndicatorPoint { kappa: 1.0 }),
        ("interval", GainFunction::IndicatorInterval { kappa: 1.0 }),
        ("regularized", GainFunction::RegularizedInterval { kappa: 1.0, eps: 0.5 }),
        ("power", GainFunction::Power { q: 2.0 }),
        ("entropy", GainFunction::Entropy),
        (
            "shifted",
            GainFunction::Shifted {
                base: Box::new(GainFunction::Power { q: 3.0 }),
                kappa: 0.5,
            },
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, gain) in rows {
        let h = Hamiltonian::closed_form(gain.clone()).unwrap();
        let mut e: f64 = 0.0;
        for i in 0..1000 {
            let z = -5.0 + 10.0 * i as f64 / 999.0;
            e = e.max((conjugate_numeric(&gain, z, 1e-3).unwrap() - h.value(z)).abs());
        }
        worst = worst.max(e);
        parts.push(format!("{name} {e:.1e}"));
    }
    verdict(worst <= 1e-6, format!("max error {worst:.2e} <= 1e-6 [{}]", parts.join(", ")))
}

fn c2_operator_order() -> Verdict {
    let t = stable(0.25);
    let g = GridSpec::new(1, 3.2, 8192, 1.0, 1).unwrap();
    let bump = SmoothBump::new(1, [0.0, 0.0], 1.0, Some(g.period()));
    let cfg = QuadratureConfig {
        images: 512,
        ..QuadratureConfig::default()
    };
    let exact = apply_levy(&t, &bump, &g, &cfg).unwrap();
    let phi = GridFunction::from_fn(g, |x| tcmfg_core::levy::SmoothField::value(&bump, x));
    let eps = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| build_epsilon_approx(&t, e, &g).unwrap().apply(&phi).unwrap().distance(&exact))
        .collect();
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 4.0;
    let my = ys.iter().sum::<f64>() / 4.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let list: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    verdict(slope >= 0.9, format!("log-log slope {slope:.3} >= 0.9 (errors {})", list.join(", ")))
}

fn c3_mass() -> Verdict {
    let opts = FpOptions::default();
    let u = uniqueness();
    let (a, b) = holmgren_runs();
    let mut runs: Vec<&MeasureTrajectory> = linear().fp_runs.iter().collect();
    runs.extend([&u.sol1.m, &u.sol2.m, a, b]);
    let mut rep = CheckReport::default();
    for r in &runs {
        rep.extend(conservation_report(r, &opts));
    }
    let mass = rep.rows.iter().filter(|r| r.check == "mass").map(|r| r.measured).fold(0.0, f64::max);
    let pos = rep.rows.iter().filter(|r| r.check == "positivity").map(|r| r.measured).fold(0.0, f64::max);
    verdict(
        failures(&rep) == 0,
        format!("{} runs, {} rows: max |mass-1| {mass:.1e}, max negative part {pos:.1e}", runs.len(), rep.rows.len()),
    )
}

fn c4_linear_oracle() -> Verdict {
    let l = linear();
    let (_, h1, f1, c1h, c1f, b1) = l.rows[0];
    let (_, h2, f2, c2h, c2f, b2) = l.rows[1];
    let (rh, rf) = (h1 / h2, f1 / f2);
    let ok = rh >= 1.8 && rf >= 1.8 && c1h <= b1 && c1f <= b1 && c2h <= b2 && c2f <= b2;
    verdict(
        ok,
        format!(
            "halving dt: hjb {h1:.2e}->{h2:.2e} (x{rh:.2}), fp {f1:.2e}->{f2:.2e} (x{rf:.2}) >= 1.8; continuum errors hjb {c2h:.2e}, fp {c2f:.2e} <= dt+h+eps = {b2:.3}"
        ),
    )
}

fn c5_comparison() -> Verdict {
    let g = GridSpec::new(1, 4.0, 256, 1.0, 100).unwrap();
    let op = build_epsilon_approx(&stable(0.25), 0.125, &g).unwrap();
    let term = GridFunction::from_fn(g, |x| (-x[0] * x[0]).exp());
    let f = vec![GridFunction::from_fn(g, |x| 0.2 * (std::f64::consts::PI * x[0] / 4.0).cos())];
    let f2: Vec<GridFunction> = f.iter().map(|x| x.add_scalar(0.1)).collect();
    let tol = 1e-9;
    let mut worst_lin: f64 = 0.0;
    let mut rep = CheckReport::default();
    for (gain, linear) in [(GainFunction::IndicatorPoint { kappa: 1.0 }, true), (GainFunction::Power { q: 2.0 }, false)] {
        let h = Hamiltonian::closed_form(gain).unwrap();
        let u1 = solve_hjb(&term, &f, &h, &op, &g).unwrap();
        let u2 = solve_hjb(&term, &f2, &h, &op, &g).unwrap();
        rep.extend(comparison_check(&u1, &u2, &f, &term, &f2, &term, tol).unwrap());
        if linear {
            for n in 0..=g.steps {
                let d = u2.u[n].distance(&u1.u[n]);
                worst_lin = worst_lin.max((d - 0.1 * (g.horizon - g.time(n))).abs());
            }
        }
    }
    verdict(
        worst_lin <= tol && failures(&rep) == 0,
        format!("linear |gap - 0.1(T-t)| max {worst_lin:.1e} <= {tol:.0e}; {} upper-bound rows, {} failed", rep.rows.len(), failures(&rep)),
    )
}

fn c6_holder() -> Verdict {
    let t = stable(0.25);
    let g = GridSpec::new(1, 4.0, 256, 1.0, 100).unwrap();
    let op = build_epsilon_approx(&t, 0.125, &g).unwrap();
    let k = std::f64::consts::PI / 4.0;
    let term = GridFunction::from_fn(g, |x| 0.2 * (k * x[0]).cos());
    let f = vec![GridFunction::from_fn(g, |x| 0.2 * (k * x[0]).sin())];
    let data = holder_norm(&f[0], 1.0) + holder_norm(&term, 1.0);
    let h = Hamiltonian::closed_form(GainFunction::Power { q: 2.0 }).unwrap();
    let u = solve_hjb(&term, &f, &h, &op, &g).unwrap();
    let rep = holder_report(&u, &t, 1.0, 1.0, 0.05, 0.05).unwrap();
    let ratio = |name: &str| {
        rep.rows
            .iter()
            .filter(|r| r.check == name)
            .map(|r| r.measured / r.bound)
            .fold(0.0, f64::max)
    };
    verdict(
        data <= 1.0 && failures(&rep) == 0,
        format!(
            "data norm {data:.3} <= M = 1; worst measured/bound: [u]_1 {:.3}, [Lu]_(1-2σ) {:.3}",
            ratio("holder_u"),
            ratio("holder_lu")
        ),
    )
}

fn c7_lyapunov() -> Verdict {
    let v = default_log_lyapunov(1);
    let xs: Vec<[f64; 2]> = (0..200).map(|i| [if i == 0 { 0.0 } else { 1e-2 * 1.08f64.powi(i) }, 0.0]).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [0.1, 0.25, 0.4] {
        let sup = sup_on_points(&stable(s), &v, &xs, &QuadratureConfig::default()).unwrap();
        let bound = log_lyapunov_bound(1, s);
        ok &= sup <= bound;
        parts.push(format!("σ={s}: {sup:.3} <= {bound:.3}"));
    }
    use statrs::function::erf::erfc;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};
    let cauchy = |t: f64| 1.0 - 2.0 / PI * t.atan();
    let laplace = |t: f64| (-t).exp();
    let gauss = |t: f64| erfc(t * FRAC_1_SQRT_2);
    let w = construct_lyapunov(1, |t: f64| cauchy(t).max(laplace(t)).max(gauss(t))).unwrap();
    let vx = |x: f64| tcmfg_core::levy::SmoothField::value(&w, [x, 0.0]);
    let integrate = |dens: &dyn Fn(f64) -> f64| 2.0 * tcmfg_core::quad::radial(&|x| vx(x) * dens(x), 0.0, f64::INFINITY, 1e-10).unwrap().value;
    let means = [
        integrate(&|x| 1.0 / (PI * (1.0 + x * x))),
        integrate(&|x| 0.5 * (-x).exp()),
        integrate(&|x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt()),
    ];
    let worst = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ok &= worst <= 1.0 + 1e-3;
    verdict(
        ok,
        format!("(a) {}; (b) m[V] for Cauchy, Laplace, Gaussian = {:.4}, {:.4}, {:.4} <= 1.001", parts.join(", "), means[0], means[1], means[2]),
    )
}

fn c8_monotone() -> Verdict {
    let g = GridSpec::new(1, 2.0, 256, 0.5, 1).unwrap();
    let c = Coupling::gaussian(g, 0.3, 1.0).unwrap();
    let rep = monotonicity_rows(&c, "running", 100, 8).unwrap();
    let row = |i: usize| rep.rows[i].measured;
    verdict(
        failures(&rep) == 0 && rep.rows.len() == 2,
        format!("max pairing {:.2e} <= 1e-12; max |pairing + ‖ρ⋆δ‖²| {:.2e} <= 1e-10", row(0), row(1)),
    )
}

fn c9_uniqueness() -> Verdict {
    let u = uniqueness();
    let r1 = u.sol1.residual();
    let r2 = u.sol2.residual();
    let gap = d0_trajectory(&u.sol1.m.m, &u.sol2.m.m).unwrap();
    let dt = u.problem.grid.dt();
    let dual = duality_residual(&u.problem, &u.sol1, &u.sol2, dt).unwrap();
    let dgap = dual.rows.iter().find(|r| r.check == "duality_gap").map(|r| r.measured).unwrap_or(f64::NAN);
    let ok = u.sol1.converged
        && u.sol2.converged
        && r1 <= 1e-5
        && r2 <= 1e-5
        && u.sol1.iterations <= u.cfg.max_iter
        && u.sol2.iterations <= u.cfg.max_iter
        && gap <= 5e-5
        && failures(&dual) == 0;
    verdict(
        ok,
        format!(
            "iterations {}/{}, residuals {r1:.1e}/{r2:.1e} <= 1e-5, sup_t d0 gap {gap:.2e} <= 5e-5, duality gap {dgap:.1e} <= dt = {dt}",
            u.sol1.iterations, u.sol2.iterations
        ),
    )
}

fn c10_holmgren() -> Verdict {
    let u = uniqueness();
    let (a, b) = holmgren_runs();
    let g = u.problem.grid;
    let phis = phi_family(&g);
    let rep = holmgren_residual(a, b, &u.sol1.b, &u.problem.op, &phis, g.steps / 2, g.dt()).unwrap();
    let worst = rep
        .rows
        .iter()
        .filter(|r| r.check.starts_with("holmgren"))
        .map(|r| r.measured)
        .fold(0.0, f64::max);
    verdict(
        failures(&rep) == 0,
        format!("{} test functions, max |(m1-m2)(t0)[w(t0)]| {worst:.2e} <= dt = {}", phis.len(), g.dt()),
    )
}

fn c11_determinism() -> Verdict {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/uniqueness.cfg");
    let root = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = root.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_tcmfg"))
            .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "5"])
            .env("TCMFG_THREADS", threads)
            .output()
            .unwrap();
        (status.status.code(), out)
    };
    let (c1, o1) = run("1");
    let (c4, o4) = run("4");
    let mut names: Vec<String> = std::fs::read_dir(&o1)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "timings.txt")
        .collect();
    names.sort();
    let differing: Vec<&String> = names
        .iter()
        .filter(|n| std::fs::read(o1.join(n)).ok() != std::fs::read(o4.join(n)).ok())
        .collect();
    let csvs = names.iter().filter(|n| n.ends_with(".csv")).count();
    verdict(
        c1 == Some(0) && c4 == Some(0) && differing.is_empty() && csvs >= 4,
        format!("exit codes {c1:?}/{c4:?}; {} files compared ({csvs} csv), differing: {differing:?}", names.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("conjugate table", c1_conjugates),
        ("operator approximation order", c2_operator_order),
        ("mass and positivity", c3_mass),
        ("linear-case oracle", c4_linear_oracle),
        ("comparison principle", c5_comparison),
        ("Hölder bounds", c6_holder),
        ("Lyapunov bounds", c7_lyapunov),
        ("monotone coupling", c8_monotone),
        ("uniqueness regime", c9_uniqueness),
        ("Holmgren residual", c10_holmgren),
        ("determinism", c11_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name}: {} ({:.1}s)", i + 1, v.detail, t0.elapsed().as_secs_f64());
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
