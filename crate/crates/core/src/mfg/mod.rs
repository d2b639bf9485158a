//! The coupled system: smoothing couplings, the bounded-Lipschitz distance
//! `d0`, damped Picard iteration and the duality checks between solutions.

mod coupling;
mod duality;
mod metric;
mod picard;

pub use coupling::Coupling;
pub use duality::duality_residual;
pub use metric::{d0_circle, d0_distance, d0_lp, d0_trajectory};
pub use picard::{fixed_point_defect, solve_mfg, MfgProblem, MfgSolution, SolverConfig};
