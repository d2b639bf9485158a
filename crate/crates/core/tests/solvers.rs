use tcmfg_core::fp::{conservation_report, solve_dual, solve_fp, solve_fp_with, FpOptions};
use tcmfg_core::grid::{spectral_reference, GridFunction, GridSpec, ProbabilityVector};
use tcmfg_core::hamiltonian::{GainFunction, Hamiltonian};
use tcmfg_core::hjb::{comparison_check, control_field, solve_hjb, ControlField};
use tcmfg_core::levy::{build_epsilon_approx, DiscreteLevyOp, LevyMeasureSpec, LevyTriplet};

fn setup(steps: usize) -> (GridSpec, DiscreteLevyOp) {
    let g = GridSpec::new(1, 4.0, 128, 0.5, steps).unwrap();
    let t = LevyTriplet::new(1, &[0.3], &[0.1], LevyMeasureSpec::stable(0.3, 1.0)).unwrap();
    (g, build_epsilon_approx(&t, 0.25, &g).unwrap())
}

fn bump(g: GridSpec) -> GridFunction {
    GridFunction::from_fn(g, |x| (-x[0] * x[0]).exp())
}

#[test]
fn linear_backward_solve_matches_the_semi_discrete_oracle() {
    let (g, op) = setup(200);
    let h = Hamiltonian::closed_form(GainFunction::IndicatorPoint { kappa: 1.0 }).unwrap();
    let u = solve_hjb(&bump(g), &[GridFunction::zeros(g)], &h, &op, &g).unwrap();
    let r = spectral_reference(&op.to_triplet().unwrap(), &bump(g), g.horizon, false).unwrap();
    assert!(u.u[0].distance(&r) < 5e-3 * g.horizon, "{}", u.u[0].distance(&r));
}

#[test]
fn value_stays_within_data_bounds_for_zero_running_cost() {
    let (g, op) = setup(50);
    let h = Hamiltonian::closed_form(GainFunction::Power { q: 2.0 }).unwrap();
    // F(z) = (z⁺)²/2 ≥ 0, so u can only grow backwards from g
    let u = solve_hjb(&bump(g), &[GridFunction::zeros(g)], &h, &op, &g).unwrap();
    for s in &u.u {
        assert!(s.min() >= -1e-12 && s.max() <= 1.0 + g.horizon * 0.5 * (2.0 * op.total_mass()).powi(2));
    }
}

#[test]
fn ordered_data_give_ordered_values() {
    let (g, op) = setup(50);
    let h = Hamiltonian::closed_form(GainFunction::Entropy).unwrap();
    let f1 = vec![GridFunction::zeros(g)];
    let f2 = vec![GridFunction::from_fn(g, |x| 0.1 + 0.05 * x[0].cos())];
    let g2 = bump(g).add_scalar(0.02);
    let u1 = solve_hjb(&bump(g), &f1, &h, &op, &g).unwrap();
    let u2 = solve_hjb(&g2, &f2, &h, &op, &g).unwrap();
    for (a, b) in u1.u.iter().zip(&u2.u) {
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x <= y));
    }
    let rep = comparison_check(&u1, &u2, &f1, &bump(g), &f2, &g2, 1e-10).unwrap();
    assert!(rep.passed());
}

#[test]
fn control_is_the_derivative_of_the_hamiltonian() {
    let (g, op) = setup(20);
    let h = Hamiltonian::closed_form(GainFunction::Power { q: 2.0 }).unwrap();
    let u = solve_hjb(&bump(g), &[GridFunction::zeros(g)], &h, &op, &g).unwrap();
    let b = control_field(&u, &h).unwrap();
    for (bn, lu) in b.b.iter().zip(&u.lu) {
        for (x, z) in bn.values.iter().zip(&lu.values) {
            assert!((x - z.max(0.0)).abs() <= 1e-14 * z.abs().max(1.0));
        }
    }
}

#[test]
fn forward_solve_conserves_mass_and_positivity() {
    let (g, op) = setup(40);
    let m0 = ProbabilityVector::dirac(g, 64).unwrap();
    let b = ControlField::from_slices((0..=g.steps).map(|n| GridFunction::from_fn(g, |x| 1.0 + 0.5 * (x[0] + n as f64 * 0.1).sin())).collect()).unwrap();
    let m = solve_fp(&m0, &b, &op, &g).unwrap();
    let rep = conservation_report(&m, &FpOptions::default());
    assert!(rep.passed());
    assert!(rep.rows.len() >= 2 * (g.steps + 1));
}

#[test]
fn dual_solve_transports_test_functions_exactly() {
    let (g, op) = setup(30);
    let m0 = ProbabilityVector::gaussian(g, [0.5, 0.0], 0.4).unwrap();
    let b = ControlField::constant(g, 0.7);
    let m = solve_fp(&m0, &b, &op, &g).unwrap();
    let phi = GridFunction::from_fn(g, |x| (x[0] * 0.9).cos());
    for n0 in [g.steps, g.steps / 3] {
        let w = solve_dual(&phi, &b, &op, n0).unwrap();
        let drift = m.m[n0].pair(&phi) - m.m[0].pair(&w.w[0]);
        assert!(drift.abs() < 1e-13, "{drift}");
    }
}

#[test]
fn refined_substeps_change_little() {
    let (g, op) = setup(30);
    let m0 = ProbabilityVector::gaussian(g, [0.0, 0.0], 0.5).unwrap();
    let b = ControlField::constant(g, 1.0);
    let coarse = solve_fp(&m0, &b, &op, &g).unwrap();
    let fine = solve_fp_with(&m0, &b, &op, &g, &FpOptions { substep_factor: 4, ..FpOptions::default() }).unwrap();
    let d: f64 = coarse.m[g.steps].weights.iter().zip(&fine.m[g.steps].weights).map(|(a, b)| (a - b).abs()).sum();
    assert!(d < g.dt() * op.total_mass(), "{d}");
}
