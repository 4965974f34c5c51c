//! Particle methods for the spatially homogeneous Landau equation.
//!
//! The library implements two deterministic regularized particle methods
//! (full O(N^2) pairwise sums) and their random-batch O(N) variants, together
//! with conservation/entropy diagnostics and the classical benchmark problems
//! (2D/3D BKW, bi-Maxwellian Coulomb relaxation, the 3D Rosenbluth problem).
//!
//! Velocities live in `[f64; D]` with `D` a const generic (2 or 3); the CLI
//! dispatches on the scenario dimension.

pub mod analytic;
pub mod batching;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod fields;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod neighbor;
pub mod stepper;

pub use config::{
    KernelSpec, Method, ParticleEnsemble, RegType, RegularizationConfig, SimConfig,
};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error{}: {msg}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Numerical { step: Option<usize>, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            step: None,
            msg: msg.into(),
        }
    }

    /// Attach a step index to a numerical error bubbling out of the driver loop.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::Numerical { msg, .. } => Error::Numerical {
                step: Some(step),
                msg,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
