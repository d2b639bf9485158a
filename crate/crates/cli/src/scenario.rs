//! Typed scenario read from a [`Config`].

use tcmfg_core::grid::{GridSpec, ProbabilityVector};
use tcmfg_core::hamiltonian::GainFunction;
use tcmfg_core::levy::{Atom, AxisStable, LevyMeasureSpec};
use tcmfg_core::mfg::{Coupling, SolverConfig};

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec {
    Zero,
    Gaussian { width: f64, strength: f64 },
}

impl CouplingSpec {
    pub fn build(&self, grid: GridSpec) -> tcmfg_core::Result<Coupling> {
        match *self {
            CouplingSpec::Zero => Ok(Coupling::zero(grid)),
            CouplingSpec::Gaussian { width, strength } => Coupling::gaussian(grid, width, strength),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Uniform,
    Gaussian { center: [f64; 2], width: f64 },
    Dirac { index: usize },
    Mixture(Vec<(f64, InitSpec)>),
}

impl InitSpec {
    pub fn build(&self, grid: GridSpec) -> tcmfg_core::Result<ProbabilityVector> {
        match self {
            InitSpec::Uniform => Ok(ProbabilityVector::uniform(grid)),
            InitSpec::Gaussian { center, width } => ProbabilityVector::gaussian(grid, *center, *width),
            InitSpec::Dirac { index } => ProbabilityVector::dirac(grid, *index),
            InitSpec::Mixture(parts) => {
                let built = parts
                    .iter()
                    .map(|(w, p)| Ok((*w, p.build(grid)?)))
                    .collect::<tcmfg_core::Result<Vec<_>>>()?;
                ProbabilityVector::mixture(&built)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    Conservation,
    Comparison,
    Holder,
    Tightness,
    Equicontinuity,
    FixedPoint,
    Uniqueness,
    Holmgren,
    Monotonicity,
    Conjugate,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::Conservation,
        CheckKind::Comparison,
        CheckKind::Holder,
        CheckKind::Tightness,
        CheckKind::Equicontinuity,
        CheckKind::FixedPoint,
        CheckKind::Uniqueness,
        CheckKind::Holmgren,
        CheckKind::Monotonicity,
        CheckKind::Conjugate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Conservation => "conservation",
            CheckKind::Comparison => "comparison",
            CheckKind::Holder => "holder",
            CheckKind::Tightness => "tightness",
            CheckKind::Equicontinuity => "equicontinuity",
            CheckKind::FixedPoint => "fixed_point",
            CheckKind::Uniqueness => "uniqueness",
            CheckKind::Holmgren => "holmgren",
            CheckKind::Monotonicity => "monotonicity",
            CheckKind::Conjugate => "conjugate",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Tunable bounds of the verification suites.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckParams {
    pub comparison_delta: f64,
    pub comparison_tol: f64,
    pub holder_tol_u: f64,
    pub holder_tol_lu: f64,
    pub tightness_tol: f64,
    pub equicontinuity_tol: f64,
    pub fixed_point_factor: f64,
    pub uniqueness_gap_factor: f64,
    pub duality_factor: f64,
    pub holmgren_slice: Option<usize>,
    pub holmgren_substep_factor: usize,
    pub holmgren_bound_factor: f64,
    pub monotonicity_pairs: usize,
    pub conjugate_samples: usize,
    pub conjugate_step: f64,
    pub conjugate_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: GridSpec,
    pub drift: Vec<f64>,
    pub diffusion: Vec<f64>,
    pub measure: LevyMeasureSpec,
    pub epsilon: f64,
    pub gain: GainFunction,
    /// Declared lower bound on `F'`; validation checks it against the Hamiltonian.
    pub lower_bound: Option<f64>,
    pub running: CouplingSpec,
    pub terminal: CouplingSpec,
    /// Hölder exponent declared for the coupling data.
    pub alpha: f64,
    pub m0: InitSpec,
    pub init: InitSpec,
    pub init2: Option<InitSpec>,
    pub solver: SolverConfig,
    /// Constant control for the single-equation modes.
    pub control: Option<f64>,
    pub checks: Vec<CheckKind>,
    pub params: CheckParams,
    pub seed: u64,
}

fn parse_grid(c: &Config) -> Result<GridSpec, CliError> {
    let dim = c.usize_or("grid.dim", 1)?;
    let why = "the grid needs half-width, points, horizon and steps";
    let half_width = c.f64_req("grid.half_width", None, why)?;
    let points = c.usize_opt("grid.points")?.ok_or_else(|| c.missing("grid.points", None, why))?;
    let horizon = c.f64_req("grid.horizon", None, why)?;
    let steps = c.usize_opt("grid.steps")?.ok_or_else(|| c.missing("grid.steps", None, why))?;
    // range checks happen in validation, so store the raw values
    Ok(GridSpec {
        dim,
        half_width,
        points,
        horizon,
        steps,
    })
}

fn parse_measure(c: &Config, dim: usize) -> Result<LevyMeasureSpec, CliError> {
    let kind = c.str_opt("levy.measure").unwrap_or_else(|| "none".into());
    let anchor = Some("levy.measure");
    let spec = match kind.as_str() {
        "none" => LevyMeasureSpec::zero(),
        "stable" => LevyMeasureSpec::Stable {
            sigma: c.f64_req("levy.sigma", anchor, "a stable measure needs its exponent")?,
            intensity: c.f64_or("levy.intensity", 1.0)?,
        },
        "tempered" => {
            let why = "a tempered stable measure needs C, G, M and Y";
            LevyMeasureSpec::TemperedStable {
                c: c.f64_req("levy.c", anchor, why)?,
                g: c.f64_req("levy.g", anchor, why)?,
                m: c.f64_req("levy.m", anchor, why)?,
                y: c.f64_req("levy.y", anchor, why)?,
            }
        }
        "atoms" => {
            let why = "atoms need positions and masses";
            let xs = c.f64_list("levy.atom_x")?.ok_or_else(|| c.missing("levy.atom_x", anchor, why))?;
            let ms = c.f64_list("levy.atom_mass")?.ok_or_else(|| c.missing("levy.atom_mass", anchor, why))?;
            let ys = if dim == 2 {
                c.f64_list("levy.atom_y")?.ok_or_else(|| c.missing("levy.atom_y", anchor, why))?
            } else {
                vec![0.0; xs.len()]
            };
            if xs.len() != ms.len() || ys.len() != ms.len() {
                return Err(c.parse_error("levy.atom_mass", "atom position and mass lists differ in length".into()));
            }
            LevyMeasureSpec::Atoms(
                xs.iter()
                    .zip(&ys)
                    .zip(&ms)
                    .map(|((&x, &y), &mass)| Atom { position: [x, y], mass })
                    .collect(),
            )
        }
        "anisotropic" => {
            let why = "an anisotropic sum needs one exponent per axis";
            let sig = c
                .f64_list("levy.axis_sigma")?
                .ok_or_else(|| c.missing("levy.axis_sigma", anchor, why))?;
            let w = c.f64_list("levy.axis_weight")?.unwrap_or_else(|| vec![1.0; sig.len()]);
            if w.len() != sig.len() {
                return Err(c.parse_error("levy.axis_weight", "one weight per axis exponent expected".into()));
            }
            LevyMeasureSpec::AnisotropicSum(
                sig.iter()
                    .zip(&w)
                    .enumerate()
                    .map(|(axis, (&sigma, &weight))| AxisStable { axis, sigma, weight })
                    .collect(),
            )
        }
        other => {
            return Err(c.parse_error(
                "levy.measure",
                format!("unknown measure `{other}` (none, stable, tempered, atoms, anisotropic)"),
            ))
        }
    };
    Ok(match c.f64_opt("levy.truncate")? {
        Some(radius) => LevyMeasureSpec::Truncated {
            inner: Box::new(spec),
            radius,
        },
        None => spec,
    })
}

fn parse_gain(c: &Config, prefix: &str) -> Result<GainFunction, CliError> {
    let vkey = format!("{prefix}variant");
    let variant = c
        .str_opt(&vkey)
        .ok_or_else(|| c.missing(&vkey, None, "the Hamiltonian row must be named"))?;
    let key = |k: &str| format!("{prefix}{k}");
    let anchor = Some(vkey.as_str());
    let req = |k: &str| -> Result<f64, CliError> { c.f64_req(&key(k), anchor, &format!("variant `{variant}` requires `{}`", key(k))) };
    Ok(match variant.as_str() {
        "point" => GainFunction::IndicatorPoint { kappa: req("kappa")? },
        "interval" => GainFunction::IndicatorInterval { kappa: req("kappa")? },
        "regularized" => GainFunction::RegularizedInterval {
            kappa: req("kappa")?,
            eps: req("eps")?,
        },
        "power" => GainFunction::Power { q: req("q")? },
        "entropy" => GainFunction::Entropy,
        "shifted" => GainFunction::Shifted {
            base: Box::new(parse_gain(c, &format!("{prefix}base."))?),
            kappa: req("kappa")?,
        },
        other => {
            return Err(c.parse_error(
                &vkey,
                format!("unknown Hamiltonian variant `{other}` (point, interval, regularized, power, entropy, shifted)"),
            ))
        }
    })
}

fn parse_coupling(c: &Config, prefix: &str) -> Result<CouplingSpec, CliError> {
    let kkey = format!("{prefix}.kind");
    let kind = c.str_opt(&kkey).unwrap_or_else(|| "zero".into());
    Ok(match kind.as_str() {
        "zero" => CouplingSpec::Zero,
        "gaussian" => CouplingSpec::Gaussian {
            width: c.f64_req(&format!("{prefix}.width"), Some(&kkey), "a Gaussian kernel needs a width")?,
            strength: c.f64_or(&format!("{prefix}.strength"), 1.0)?,
        },
        other => return Err(c.parse_error(&kkey, format!("unknown coupling `{other}` (zero, gaussian)"))),
    })
}

fn parse_init(c: &Config, prefix: &str, dim: usize) -> Result<InitSpec, CliError> {
    let kkey = format!("{prefix}.kind");
    let kind = c.str_opt(&kkey).unwrap_or_else(|| "uniform".into());
    let anchor = Some(kkey.as_str());
    Ok(match kind.as_str() {
        "uniform" => InitSpec::Uniform,
        "gaussian" => {
            let ckey = format!("{prefix}.center");
            let center = c.f64_list(&ckey)?.unwrap_or_else(|| vec![0.0; dim]);
            if center.len() != dim {
                return Err(c.parse_error(&ckey, format!("center needs {dim} coordinates")));
            }
            InitSpec::Gaussian {
                center: [center[0], if dim == 2 { center[1] } else { 0.0 }],
                width: c.f64_req(&format!("{prefix}.width"), anchor, "a Gaussian needs a width")?,
            }
        }
        "dirac" => {
            let ikey = format!("{prefix}.index");
            InitSpec::Dirac {
                index: c.usize_opt(&ikey)?.ok_or_else(|| c.missing(&ikey, anchor, "a Dirac needs a node index"))?,
            }
        }
        "mixture" => {
            let pkey = format!("{prefix}.parts");
            let names = c.list(&pkey);
            if names.is_empty() {
                return Err(c.missing(&pkey, anchor, "a mixture lists its parts"));
            }
            let mut parts = Vec::new();
            for n in names {
                let sub = format!("{prefix}.{n}");
                let w = c.f64_req(&format!("{sub}.weight"), Some(&pkey), "every mixture part needs a weight")?;
                parts.push((w, parse_init(c, &sub, dim)?));
            }
            InitSpec::Mixture(parts)
        }
        other => {
            return Err(c.parse_error(&kkey, format!("unknown initializer `{other}` (uniform, gaussian, dirac, mixture)")))
        }
    })
}

fn parse_checks(c: &Config) -> Result<Vec<CheckKind>, CliError> {
    let mut out = Vec::new();
    for name in c.list("checks") {
        match CheckKind::from_name(&name) {
            Some(k) if !out.contains(&k) => out.push(k),
            Some(_) => {}
            None => {
                let known: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
                return Err(c.parse_error("checks", format!("unknown check `{name}` (known: {})", known.join(", "))));
            }
        }
    }
    Ok(out)
}

fn parse_params(c: &Config) -> Result<CheckParams, CliError> {
    Ok(CheckParams {
        comparison_delta: c.f64_or("checks.comparison.delta", 0.1)?,
        comparison_tol: c.f64_or("checks.comparison.tol", 1e-9)?,
        holder_tol_u: c.f64_or("checks.holder.tol_u", 0.05)?,
        holder_tol_lu: c.f64_or("checks.holder.tol_lu", 0.05)?,
        tightness_tol: c.f64_or("checks.tightness.tol", 1e-9)?,
        equicontinuity_tol: c.f64_or("checks.equicontinuity.tol", 1e-9)?,
        fixed_point_factor: c.f64_or("checks.fixed_point.factor", 10.0)?,
        uniqueness_gap_factor: c.f64_or("checks.uniqueness.gap_factor", 5.0)?,
        duality_factor: c.f64_or("checks.uniqueness.duality_factor", 1.0)?,
        holmgren_slice: c.usize_opt("checks.holmgren.slice")?,
        holmgren_substep_factor: c.usize_or("checks.holmgren.substep_factor", 2)?,
        holmgren_bound_factor: c.f64_or("checks.holmgren.bound_factor", 1.0)?,
        monotonicity_pairs: c.usize_or("checks.monotonicity.pairs", 100)?,
        conjugate_samples: c.usize_or("checks.conjugate.samples", 1000)?,
        conjugate_step: c.f64_or("checks.conjugate.step", 1e-3)?,
        conjugate_tol: c.f64_or("checks.conjugate.tol", 1e-6)?,
    })
}

impl Scenario {
    pub fn from_config(c: &Config) -> Result<Self, CliError> {
        let grid = parse_grid(c)?;
        let dim = grid.dim;
        let drift = c.f64_list("levy.drift")?.unwrap_or_else(|| vec![0.0; dim]);
        let diffusion = c.f64_list("levy.diffusion")?.unwrap_or_else(|| vec![0.0; dim * dim]);
        let measure = parse_measure(c, dim)?;
        let epsilon = c.f64_req("epsilon", None, "the stencil scale must be given")?;
        let gain = parse_gain(c, "hamiltonian.")?;
        let lower_bound = c.f64_opt("hamiltonian.lower_bound")?;
        let running = parse_coupling(c, "coupling.running")?;
        let terminal = parse_coupling(c, "coupling.terminal")?;
        let alpha = c.f64_or("coupling.alpha", 1.0)?;
        let m0 = parse_init(c, "m0", dim)?;
        let init = if c.has("init.kind") { parse_init(c, "init", dim)? } else { m0.clone() };
        let init2 = if c.has("init2.kind") { Some(parse_init(c, "init2", dim)?) } else { None };
        let d = SolverConfig::default();
        let solver = SolverConfig {
            damping: c.f64_or("solver.damping", d.damping)?,
            min_damping: c.f64_or("solver.min_damping", d.min_damping)?,
            tol: c.f64_or("solver.tol", d.tol)?,
            max_iter: c.usize_or("solver.max_iter", d.max_iter)?,
        };
        let control = c.f64_opt("control.constant")?;
        let checks = parse_checks(c)?;
        let params = parse_params(c)?;
        let seed = c.u64_opt("seed")?.unwrap_or(0);
        Ok(Scenario {
            grid,
            drift,
            diffusion,
            measure,
            epsilon,
            gain,
            lower_bound,
            running,
            terminal,
            alpha,
            m0,
            init,
            init2,
            solver,
            control,
            checks,
            params,
            seed,
        })
    }
}
