//! Fail-fast checks of a scenario before any solve.

use tcmfg_core::grid::ProbabilityVector;
use tcmfg_core::hamiltonian::Hamiltonian;
use tcmfg_core::hjb::HjbOptions;
use tcmfg_core::levy::{build_epsilon_approx, DiscreteLevyOp, LevyTriplet};
use tcmfg_core::mfg::Coupling;

use crate::scenario::{CheckKind, CouplingSpec, Scenario};
use crate::Mode;

/// Objects every mode needs, built once validation has passed.
#[derive(Debug, Clone)]
pub struct Built {
    pub triplet: LevyTriplet,
    pub op: DiscreteLevyOp,
    pub hamiltonian: Hamiltonian,
    pub running: Coupling,
    pub terminal: Coupling,
    pub m0: ProbabilityVector,
    pub init: ProbabilityVector,
    pub init2: Option<ProbabilityVector>,
}

#[derive(Debug, Default, Clone)]
pub struct Validation {
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl Validation {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.violations.is_empty() {
            s.push_str("validation: ok\n");
        } else {
            s.push_str(&format!("validation: {} violation(s)\n", self.violations.len()));
            for v in &self.violations {
                s.push_str(&format!("  - {v}\n"));
            }
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

fn needs(check: CheckKind) -> &'static [Mode] {
    match check {
        CheckKind::Conservation | CheckKind::Tightness | CheckKind::Equicontinuity | CheckKind::Holmgren => &[Mode::Mfg, Mode::Fp, Mode::Dual],
        CheckKind::Comparison | CheckKind::Holder => &[Mode::Mfg, Mode::Hjb],
        CheckKind::FixedPoint | CheckKind::Uniqueness => &[Mode::Mfg],
        CheckKind::Monotonicity | CheckKind::Conjugate => &[Mode::Mfg, Mode::Hjb, Mode::Fp, Mode::Dual],
    }
}

/// The arithmetic of the uniqueness condition `2σ/(α-2σ)·(1 + 1/(1-2σ)) < γ`.
pub fn uniqueness_arithmetic(two_sigma: f64, alpha: f64, gamma: f64) -> (f64, bool, String) {
    let lhs = two_sigma / (alpha - two_sigma) * (1.0 + 1.0 / (1.0 - two_sigma));
    let inside = alpha > two_sigma && lhs < gamma;
    let text = format!(
        "uniqueness condition 2σ/(α-2σ)·(1+1/(1-2σ)) < γ: 2σ = {two_sigma}, α = {alpha}: {two_sigma}/{:.6}·(1+1/{:.6}) = {lhs:.6} {} γ = {gamma:.6}; {}",
        alpha - two_sigma,
        1.0 - two_sigma,
        if inside { "<" } else { "≥" },
        if inside {
            "inside the uniqueness regime"
        } else {
            "WARNING: outside the uniqueness regime, solutions may differ between initializations"
        }
    );
    (lhs, inside, text)
}

fn coupling_violations(spec: &CouplingSpec, which: &str, out: &mut Vec<String>) {
    if let CouplingSpec::Gaussian { width, strength } = *spec {
        if !(width > 0.0 && width.is_finite()) {
            out.push(format!("{which} coupling: kernel width must be positive, got {width}"));
        }
        if !(strength >= 0.0 && strength.is_finite()) {
            out.push(format!(
                "{which} coupling: monotonicity ∫(f(m₁)-f(m₂))d(m₁-m₂) ≤ 0 requires strength ≥ 0, got {strength}"
            ));
        }
    }
}

/// Validates `s` for `mode`; builds the shared objects when everything checks out
/// far enough to construct them.
pub fn validate(s: &Scenario, mode: Mode, unused: &[(String, usize)]) -> (Validation, Option<Built>) {
    let mut v = Validation::default();
    let viol = &mut v.violations;

    let grid_ok = match s.grid.validate() {
        Ok(()) => true,
        Err(e) => {
            viol.push(format!("grid: {e}"));
            false
        }
    };
    let triplet = match LevyTriplet::new(s.grid.dim, &s.drift, &s.diffusion, s.measure.clone()) {
        Ok(t) => Some(t),
        Err(e) => {
            viol.push(format!("Lévy triplet: {e}"));
            None
        }
    };
    let hamiltonian = match Hamiltonian::closed_form(s.gain.clone()) {
        Ok(h) => {
            if !h.differentiable {
                viol.push(format!(
                    "Hamiltonian: F must be differentiable so that the rate F'(Lu) is single-valued; variant {:?} has a kink at 0",
                    s.gain
                ));
            }
            if let Some(k) = s.lower_bound {
                if h.lower_slope < k {
                    viol.push(format!("Hamiltonian: declared lower bound F' ≥ {k} fails, inf F' = {}", h.lower_slope));
                }
            }
            Some(h)
        }
        Err(e) => {
            viol.push(format!("Hamiltonian: {e}"));
            None
        }
    };
    coupling_violations(&s.running, "running", viol);
    coupling_violations(&s.terminal, "terminal", viol);
    if !(s.alpha > 0.0 && s.alpha <= 1.0) {
        viol.push(format!("coupling Hölder exponent α must lie in (0,1], got {}", s.alpha));
    }
    let sc = &s.solver;
    if !(sc.damping > 0.0 && sc.damping <= 1.0) {
        viol.push(format!("solver: damping must lie in (0,1], got {}", sc.damping));
    }
    if !(sc.min_damping > 0.0 && sc.min_damping <= sc.damping) {
        viol.push(format!("solver: min_damping must lie in (0, damping], got {}", sc.min_damping));
    }
    if !(sc.tol > 0.0) {
        viol.push(format!("solver: tolerance must be positive, got {}", sc.tol));
    }
    if sc.max_iter == 0 {
        viol.push("solver: max_iter must be positive".into());
    }
    if let Some(b) = s.control {
        if !(b >= 0.0 && b.is_finite()) {
            viol.push(format!("control: a time-change rate must be nonnegative, got {b}"));
        }
    }
    for &c in &s.checks {
        if !needs(c).contains(&mode) {
            viol.push(format!("check `{}` is not available in mode {}", c.name(), mode.name()));
        }
    }
    if s.checks.contains(&CheckKind::Uniqueness) && s.init2.is_none() {
        viol.push("check `uniqueness` needs a second initialization (init2.kind)".into());
    }
    if s.params.holmgren_substep_factor < 2 {
        viol.push("checks.holmgren.substep_factor must be at least 2".into());
    }
    if let Some(n) = s.params.holmgren_slice {
        if grid_ok && n > s.grid.steps {
            viol.push(format!("checks.holmgren.slice {n} exceeds the {} time steps", s.grid.steps));
        }
    }

    if let (Some(t), Some(h)) = (&triplet, &hamiltonian) {
        match t.jump.la_exponent() {
            Some(ts) => {
                let (_, _, text) = uniqueness_arithmetic(ts, s.alpha, h.gamma);
                v.notes.push(text);
                if s.checks.contains(&CheckKind::Holder) && s.alpha <= ts {
                    viol.push(format!("check `holder` needs α > 2σ, got α = {} and 2σ = {ts}", s.alpha));
                }
            }
            None => {
                v.notes.push("uniqueness condition: the measure has no small-jump exponent below 1; arithmetic not applicable".into());
                if s.checks.contains(&CheckKind::Holder) {
                    viol.push("check `holder` needs a measure with a small-jump exponent 2σ < 1".into());
                }
            }
        }
    }
    for (k, line) in unused {
        v.notes.push(format!("unused key `{k}` on line {line}"));
    }

    if !grid_ok {
        return (v, None);
    }
    let grid = s.grid;
    let op = match &triplet {
        Some(t) => match build_epsilon_approx(t, s.epsilon, &grid) {
            Ok(op) => Some(op),
            Err(e) => {
                v.violations.push(format!("stencil: {e}"));
                None
            }
        },
        None => None,
    };
    let mut build = |what: &str, r: tcmfg_core::Result<ProbabilityVector>| match r {
        Ok(p) => Some(p),
        Err(e) => {
            v.violations.push(format!("{what}: {e}"));
            None
        }
    };
    let m0 = build("m0", s.m0.build(grid));
    let init = build("init", s.init.build(grid));
    let init2 = match &s.init2 {
        Some(i) => build("init2", i.build(grid)).map(Some),
        None => Some(None),
    };
    let running = s.running.build(grid);
    let terminal = s.terminal.build(grid);
    let (running, terminal) = match (running, terminal) {
        (Ok(r), Ok(t)) => (Some(r), Some(t)),
        (r, t) => {
            for e in [r.err(), t.err()].into_iter().flatten() {
                v.violations.push(format!("coupling: {e}"));
            }
            (None, None)
        }
    };

    if let (Some(op), Some(h), Some(r), Some(t)) = (&op, &hamiltonian, &running, &terminal) {
        // substeps the backward solver would need at the a priori bound on |L u|
        let (fs, _) = r.bounds();
        let (gs, _) = t.bounds();
        let horizon = grid.horizon;
        let ubound = gs + horizon * (fs + h.value(0.0).abs());
        let lmax = 2.0 * op.total_mass() * ubound;
        let needed = grid.dt() * h.derivative(lmax) * op.total_mass();
        v.notes.push(format!(
            "stencil: ε = {} (effective {}), mass W = {:.6}, a priori substeps per step ≤ {:.0}",
            s.epsilon,
            op.effective_epsilon(),
            op.total_mass(),
            needed.ceil().max(1.0)
        ));
        if !(needed <= HjbOptions::default().max_substeps as f64) {
            v.violations.push(format!(
                "time step: dt F'(2W sup|u|) W = {needed:.3e} exceeds the substep budget {}",
                HjbOptions::default().max_substeps
            ));
        }
    }

    let built = match (triplet, op, hamiltonian, running, terminal, m0, init, init2) {
        (Some(triplet), Some(op), Some(hamiltonian), Some(running), Some(terminal), Some(m0), Some(init), Some(init2)) => Some(Built {
            triplet,
            op,
            hamiltonian,
            running,
            terminal,
            m0,
            init,
            init2,
        }),
        _ => None,
    };
    (v, built)
}
