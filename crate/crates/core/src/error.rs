//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("invalid delta geometry: {0}")]
    BadGeometry(String),
    #[error("forward kinematics has no solution: {0}")]
    NoSolution(String),
    #[error("point unreachable: {0}")]
    Unreachable(String),
    #[error("(q, p) pair violates loop closure by {residual:.3e} m")]
    InconsistentInput { residual: f64 },
    #[error("M matrix numerically singular (cond {cond:.3e})")]
    SingularM { cond: f64 },
    #[error("fold singularity: min |V_ii| = {min_v:.3e}")]
    SingularV { min_v: f64 },
}

#[derive(Debug, Error)]
pub enum ObserverError {
    #[error("observer stepped before reset")]
    NotInitialized,
    #[error("invalid cutoff {f_cut} Hz at sample rate {f_s} Hz")]
    InvalidCutoff { f_cut: f64, f_s: f64 },
}

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("degenerate thrust: |a_c - g| = {norm:.3e} m/s^2")]
    DegenerateThrust { norm: f64 },
    #[error("thrust axis parallel to yaw heading (|y_C x z_B| = {norm:.3e})")]
    GimbalDegenerate { norm: f64 },
    #[error(transparent)]
    Arm(#[from] KinematicsError),
}

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("state left finite range at t={t:.4} s: {what}")]
    NonFinite { t: f64, what: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid trajectory parameters: {0}")]
    InvalidParams(String),
    #[error("empty error series")]
    EmptySeries,
    #[error("numerical abort: {0}")]
    NumericalAbort(#[from] PlantError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
