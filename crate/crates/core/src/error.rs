use thiserror::Error;

/// Errors raised by the physics modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("subsystem index {index} out of range for {len} subsystems")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not converged: {0}")]
    Convergence(String),
    #[error("straddling regime (0 < delta < EC): {0}; use exact diagonalization")]
    Straddling(String),
    #[error("resonant denominator between levels {i} and {j}")]
    Resonance { i: usize, j: usize },
    #[error("degenerate levels across subspaces: {0}")]
    Degeneracy(String),
    #[error("step size underflow at t = {t:e}; reduce dimensions or use a stiff method")]
    Stiffness { t: f64 },
    #[error("steady state is not unique (null space dimension {0})")]
    SteadyStateMultiplicity(usize),
    #[error("truncation leakage {population:e} exceeds {threshold:e}")]
    Leakage { population: f64, threshold: f64 },
    #[error("efficiency undefined: measurement rate beta_m is zero")]
    UndefinedEfficiency,
    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
