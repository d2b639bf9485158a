use proptest::prelude::*;
use tcmfg_core::grid::{spectral_apply, GridFunction, GridSpec};
use tcmfg_core::levy::{build_epsilon_approx, lk_norm, Atom, LevyMeasureSpec, LevyTriplet};

fn grid1(points: usize) -> GridSpec {
    GridSpec::new(1, 4.0, points, 1.0, 10).unwrap()
}

fn triplets() -> Vec<LevyTriplet> {
    vec![
        LevyTriplet::new(1, &[0.5], &[0.2], LevyMeasureSpec::stable(0.25, 1.0)).unwrap(),
        LevyTriplet::pure_jump(1, LevyMeasureSpec::TemperedStable { c: 1.0, g: 2.0, m: 3.0, y: 0.5 }).unwrap(),
        LevyTriplet::pure_jump(
            1,
            LevyMeasureSpec::Atoms(vec![
                Atom { position: [0.75, 0.0], mass: 2.0 },
                Atom { position: [-2.5, 0.0], mass: 0.5 },
            ]),
        )
        .unwrap(),
    ]
}

#[test]
fn constants_are_annihilated_exactly() {
    let g = grid1(128);
    for t in triplets() {
        let op = build_epsilon_approx(&t, 0.125, &g).unwrap();
        let out = op.apply(&GridFunction::constant(g, 3.7)).unwrap();
        assert_eq!(out.sup_norm(), 0.0);
        let out = op.apply_adjoint(&GridFunction::constant(g, 1.0)).unwrap();
        assert!(out.sup_norm() < 1e-12);
    }
}

#[test]
fn adjoint_is_the_transpose() {
    let g = grid1(64);
    let op = build_epsilon_approx(&triplets()[0], 0.125, &g).unwrap();
    let phi = GridFunction::from_fn(g, |x| (x[0] * 0.7).sin() + 0.1 * x[0].cos());
    let mu = GridFunction::from_fn(g, |x| (-x[0] * x[0]).exp());
    let lhs: f64 = op.apply(&phi).unwrap().values.iter().zip(&mu.values).map(|(a, b)| a * b).sum();
    let rhs: f64 = op.apply_adjoint(&mu).unwrap().values.iter().zip(&phi.values).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
}

#[test]
fn semi_discrete_triplet_reproduces_the_stencil() {
    let g = grid1(128);
    for t in triplets() {
        let op = build_epsilon_approx(&t, 0.125, &g).unwrap();
        let phi = GridFunction::from_fn(g, |x| (std::f64::consts::PI * x[0] / 4.0).cos().exp());
        let direct = op.apply(&phi).unwrap();
        let spectral = spectral_apply(&op.to_triplet().unwrap(), &phi).unwrap();
        assert!(direct.distance(&spectral) < 1e-9, "{}", direct.distance(&spectral));
    }
}

#[test]
fn lk_norm_of_the_approximation_stays_close() {
    let g = grid1(1024);
    let t = &triplets()[0];
    let full = lk_norm(t).unwrap();
    for eps in [0.25, 0.125, 0.0625] {
        let op = build_epsilon_approx(t, eps, &g).unwrap();
        // snapping to nodes moves atoms by at most h/2
        let slack = 1.0 + eps + 0.05;
        assert!(op.lk_norm() <= slack * full, "eps {eps}: {} vs {full}", op.lk_norm());
    }
}

#[test]
fn stencil_export_has_one_row_per_entry() {
    let g = grid1(64);
    let op = build_epsilon_approx(&triplets()[2], 0.25, &g).unwrap();
    let mut buf = Vec::new();
    op.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("offset,weight"));
    assert_eq!(text.lines().count(), op.entries().len() + 1);
}

#[test]
fn two_dimensional_stencil_is_zero_sum() {
    let g = GridSpec::new(2, 2.0, 32, 1.0, 4).unwrap();
    let t = LevyTriplet::new(2, &[0.3, -0.2], &[0.1, 0.0, 0.0, 0.1], LevyMeasureSpec::stable(0.3, 1.0)).unwrap();
    let op = build_epsilon_approx(&t, 0.25, &g).unwrap();
    assert_eq!(op.apply(&GridFunction::constant(g, 1.0)).unwrap().sup_norm(), 0.0);
    assert!(op.entries().iter().all(|e| e.weight >= 0.0 || e.offset == [0, 0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weights_are_nonnegative_off_the_diagonal(sigma in 0.05f64..0.45, eps in 0.1f64..0.5) {
        let g = grid1(128);
        let t = LevyTriplet::pure_jump(1, LevyMeasureSpec::stable(sigma, 1.0)).unwrap();
        let op = build_epsilon_approx(&t, eps, &g).unwrap();
        for e in op.entries() {
            if e.offset != [0, 0] {
                prop_assert!(e.weight >= 0.0);
            }
        }
        let sum: f64 = op.entries().iter().filter(|e| e.offset != [0, 0]).map(|e| e.weight).sum();
        prop_assert!((sum - op.total_mass()).abs() <= 1e-9 * op.total_mass());
    }
}
