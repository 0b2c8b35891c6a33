use std::path::PathBuf;

/// Errors raised anywhere in the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid particle system: {0}")]
    InvalidSystem(String),

    #[error("could not place particle {placed} of {requested} after {attempts} attempts")]
    Placement {
        placed: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("particles {0} and {1} are coincident")]
    CoincidentParticles(usize, usize),

    #[error("distance must be positive, got {0}")]
    Domain(f64),

    #[error("unsupported {what} {value}; only {supported} is implemented")]
    Unsupported {
        what: &'static str,
        value: u32,
        supported: u32,
    },

    #[error("level {level} is outside the hierarchy 0..{levels}")]
    LevelIndex { level: usize, levels: usize },

    #[error("grid hierarchy mismatch: {0}")]
    Hierarchy(String),

    #[error("particle {index} at {position} lies outside the grid coverage")]
    OutOfCoverage { index: usize, position: crate::Vec3 },

    #[error("non-finite state after step {step}")]
    NonFinite { step: usize },

    #[error("parareal window {window} did not converge within {max_iter} iterations")]
    NonConvergence {
        window: usize,
        max_iter: usize,
        report: Box<crate::parareal::ConvergenceReport>,
    },

    #[error("invalid schedule parameters: {0}")]
    Schedule(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
