//! `d0(μ, ν) = sup { (μ-ν)[ψ] : ‖ψ‖∞ ≤ 1, Lip(ψ) ≤ 1 }` on the grid.
//!
//! The Lipschitz constraint is imposed on neighbouring nodes, which is exact
//! in d = 1 and uses the ℓ¹ grid distance in d = 2.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::grid::ProbabilityVector;
use crate::{Error, Result};

/// `d0` by the cheapest exact method available.
pub fn d0_distance(mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<f64> {
    mu.grid.check_same_space(&nu.grid)?;
    match d0_circle(mu, nu) {
        Some(v) => Ok(v),
        None => d0_lp(mu, nu),
    }
}

/// Closed form on a circle of circumference at most 4, where the bound
/// `‖ψ‖∞ ≤ 1` is implied by the Lipschitz bound: the Wasserstein-1 distance
/// `min_c Σ h |F_i - c|` with `F` the cumulative sum of `μ - ν`.
pub fn d0_circle(mu: &ProbabilityVector, nu: &ProbabilityVector) -> Option<f64> {
    let g = mu.grid;
    if g.dim != 1 || g.period() > 4.0 {
        return None;
    }
    let h = g.spacing();
    let mut acc = 0.0;
    let mut cum: Vec<f64> = mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(a, b)| {
            acc += a - b;
            acc
        })
        .collect();
    let mut sorted = cum.clone();
    sorted.sort_by(f64::total_cmp);
    let c = sorted[sorted.len() / 2];
    for v in cum.iter_mut() {
        *v = (*v - c).abs();
    }
    Some(h * cum.iter().sum::<f64>())
}

/// The linear program over `ψ ∈ [-1,1]^N` with `|ψ_i - ψ_j| ≤ h` on
/// neighbouring nodes (periodic).
pub fn d0_lp(mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<f64> {
    mu.grid.check_same_space(&nu.grid)?;
    let g = mu.grid;
    let n = g.points;
    let h = g.spacing();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = mu
        .weights
        .iter()
        .zip(&nu.weights)
        .map(|(a, b)| lp.add_var(a - b, (-1.0, 1.0)))
        .collect();
    let mut link = |i: usize, j: usize| {
        lp.add_constraint(&[(vars[i], 1.0), (vars[j], -1.0)], ComparisonOp::Le, h);
        lp.add_constraint(&[(vars[i], 1.0), (vars[j], -1.0)], ComparisonOp::Ge, -h);
    };
    if g.dim == 1 {
        for i in 0..n {
            link(i, (i + 1) % n);
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                let p = i * n + j;
                link(p, ((i + 1) % n) * n + j);
                link(p, i * n + (j + 1) % n);
            }
        }
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::LinearProgram(format!("{e} ({} variables)", vars.len())))?;
    Ok(sol.objective().max(0.0))
}

/// `sup_n d0(μ_n, ν_n)` over two sequences of slices.
pub fn d0_trajectory(a: &[ProbabilityVector], b: &[ProbabilityVector]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch("trajectories with different slice counts".into()));
    }
    let mut m: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        m = m.max(d0_distance(x, y)?);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(grid: GridSpec, rng: &mut ChaCha8Rng) -> ProbabilityVector {
        let w = (0..grid.len()).map(|_| rng.gen::<f64>().powi(4)).collect();
        ProbabilityVector::normalized(grid, w).unwrap()
    }

    #[test]
    fn diracs() {
        let g = GridSpec::new(1, 8.0, 64, 1.0, 1).unwrap();
        let a = ProbabilityVector::dirac(g, 32).unwrap();
        let b = ProbabilityVector::dirac(g, 36).unwrap();
        assert!((d0_distance(&a, &b).unwrap() - 1.0).abs() < 1e-9);
        let b = ProbabilityVector::dirac(g, 34).unwrap();
        assert!((d0_distance(&a, &b).unwrap() - 0.5).abs() < 1e-9);
        let b = ProbabilityVector::dirac(g, 52).unwrap();
        assert!((d0_distance(&a, &b).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(d0_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn circle_formula_matches_lp() {
        let g = GridSpec::new(1, 2.0, 64, 1.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random(g, &mut rng);
            let b = random(g, &mut rng);
            let c = d0_circle(&a, &b).unwrap();
            let l = d0_lp(&a, &b).unwrap();
            assert!((c - l).abs() < 1e-10, "{c} {l}");
        }
    }

    #[test]
    fn metric_axioms_and_tv_bound() {
        for g in [GridSpec::new(1, 4.0, 32, 1.0, 1).unwrap(), GridSpec::new(2, 2.0, 8, 1.0, 1).unwrap()] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..10 {
                let (a, b, c) = (random(g, &mut rng), random(g, &mut rng), random(g, &mut rng));
                let ab = d0_distance(&a, &b).unwrap();
                let ba = d0_distance(&b, &a).unwrap();
                let ac = d0_distance(&a, &c).unwrap();
                let cb = d0_distance(&c, &b).unwrap();
                assert!((ab - ba).abs() < 1e-9);
                assert!(ab <= ac + cb + 1e-9);
                let tv: f64 = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).sum();
                assert!(ab <= tv + 1e-9 && ab <= 2.0 + 1e-9);
                assert!(d0_distance(&a, &a).unwrap() < 1e-12);
            }
        }
    }
}
