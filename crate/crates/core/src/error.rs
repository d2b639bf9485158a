use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Lévy measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e} ({context})")]
    Quadrature {
        estimate: f64,
        tolerance: f64,
        context: String,
    },

    #[error("epsilon {epsilon} is below the grid spacing {spacing}; need at least {required_points} points per axis")]
    EpsilonUnresolved {
        epsilon: f64,
        spacing: f64,
        required_points: usize,
    },

    #[error("no Lyapunov function: {0}")]
    NoLyapunov(String),

    #[error("symbol evaluation failed: {0}")]
    Symbol(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid Hamiltonian parameters: {0}")]
    HamiltonianParams(String),

    #[error("conjugate is +infinity at z = {z}")]
    InfiniteConjugate { z: f64 },

    #[error("Hamiltonian is not differentiable at z = {z}; subdifferential is [{lower}, {upper}]")]
    NotDifferentiable { z: f64, lower: f64, upper: f64 },

    #[error("instability at t = {time}: {bound} violated (measured {measured:.6e}, bound {limit:.6e})")]
    Instability {
        time: f64,
        bound: String,
        measured: f64,
        limit: f64,
    },

    #[error("CFL violation at step {step}: {detail}")]
    Cfl { step: usize, detail: String },

    #[error("mass conservation fault at step {step}: |mass - 1| = {drift:.3e}")]
    Conservation { step: usize, drift: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
