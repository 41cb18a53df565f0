use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid of {requested} bytes exceeds the memory budget of {budget} bytes")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("axis {axis} out of range for {n_particles} particle(s)")]
    AxisOutOfRange { axis: usize, n_particles: usize },

    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("state does not fit in the box: edge tail mass {tail_mass:e}")]
    StateExceedsBox { tail_mass: f64 },

    #[error("orbitals are linearly dependent (pre-normalization norm {norm:e})")]
    LinearlyDependentOrbitals { norm: f64 },

    #[error("non-finite amplitude at step {step} (max |psi| = {max_amplitude:e})")]
    NanDetected { step: usize, max_amplitude: f64 },

    #[error("density {density:e} below mask threshold {threshold:e}: weak value undefined at a node")]
    NodePoint { density: f64, threshold: f64 },

    #[error("exchange antisymmetry violated (residual {residual:e})")]
    SymmetryViolated { residual: f64 },

    #[error("no unmasked samples in the averaging window")]
    EmptyWindow,

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("eigensolver failed: {0}")]
    NonConvergence(String),

    #[error("observer failed at t = {time}: {source}")]
    Observer { time: f64, source: Box<Error> },

    #[error("config schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("corrupt snapshot header: {0}")]
    CorruptHeader(String),

    #[error("snapshot size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// True for errors caused by malformed user input rather than by the
    /// numerics (command-line front ends map these to a usage exit code).
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Schema { .. } | Error::Json(_))
    }
}
