//! Numerical toolkit for nonlocal mean field games in which agents control
//! the time-change rate of a Lévy process.
//!
//! The system solved is
//!
//! ```text
//! -∂t u = F(L u) + f(m)          u(T) = g(m(T))
//!  ∂t m = L*(F'(L u) m)          m(0) = m0
//! ```
//!
//! on a periodic truncation of ℝ^d (d ≤ 2), where `L` is a Lévy operator given
//! by a triplet `(c, a, ν)` and `F` is the Legendre–Fenchel conjugate of a
//! convex gain `L(ζ)` on `[0, ∞)`.
//!
//! Modules:
//! - [`levy`]: triplets, measures, LK-norm, the ε-stencil, Lyapunov functions.
//! - [`grid`]: periodic grids, fields, probability vectors, FFT oracle, I/O.
//! - [`hamiltonian`]: conjugate pairs and numerical conjugation.
//! - [`hjb`]: backward explicit monotone solver and its checkers.
//! - [`fp`]: forward Fokker–Planck, dual equation, uniqueness residuals.
//! - [`mfg`]: couplings, the d0 metric, damped Picard iteration, duality.

pub mod check;
pub mod error;
pub mod fp;
pub mod grid;
pub mod hamiltonian;
pub mod hjb;
pub mod levy;
pub mod mfg;
pub mod quad;
pub mod special;

pub use error::{Error, Result};

/// A point of ℝ^d stored with two slots; the second is ignored when d = 1.
pub type Point = [f64; 2];
