//! Deterministic simulation and control toolkit for an aerial manipulator:
//! a quadrotor carrying a 3-DoF delta parallel arm.
//!
//! The crate provides
//! - [`math`]: frame conventions and rotation primitives,
//! - [`delta`]: delta-arm position/velocity kinematics and world composition,
//! - [`observers`]: low-frequency force observer and high-frequency
//!   end-effector compensation,
//! - [`control`]: cascade PID outer loop, differential-flatness attitude and
//!   thrust extraction, body-rate and arm commands,
//! - [`plant`]: ground-truth rigid-body simulation, servo and wind models,
//! - [`harness`]: scenario wiring, trajectory generators, metrics,
//!   configuration and telemetry.

pub mod control;
pub mod delta;
pub mod error;
pub mod harness;
pub mod math;
pub mod observers;
pub mod plant;

pub use math::{Mat3, Vec3};
