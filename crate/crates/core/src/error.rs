use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown ion species '{0}'")]
    UnknownSpecies(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A radial branch has ω_c² ≤ 2Ω_z² and its frequency is no longer real.
    #[error("radial instability on branch {branch}: omega_c^2 = {omega_c_sq:.6e} <= 2*omega_z^2 = {limit:.6e}")]
    RadialInstability {
        branch: String,
        omega_c_sq: f64,
        limit: f64,
    },

    #[error("unstable normal mode: eigenvalue {re:.3e} + {im:.3e}i has a growing or decaying part")]
    UnstableMode { re: f64, im: f64 },

    #[error("no axial equilibrium: {0}")]
    Geometry(String),

    #[error("fit failed after {iterations} iterations: {reason}")]
    FitFailed { iterations: usize, reason: String },

    #[error("no steady state: net rate {rate} for {mode} is not positive")]
    NoSteadyState { mode: String, rate: f64 },

    #[error("integration step too large: {0}")]
    StepSize(String),

    #[error("classically forbidden at z = {z:.6e} m (potential energy exceeds total energy)")]
    TurningPoint { z: f64 },

    #[error("ions {i} and {j} closer than 1 nm")]
    Singularity { i: usize, j: usize },

    #[error("series too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("diagnostic not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid input: {0}")]
    Input(String),
}
