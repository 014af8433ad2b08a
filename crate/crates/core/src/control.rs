//! Flight and arm controllers.
//!
//! The quadrotor outer loop is a cascade: position error scales into a
//! velocity command, and a PID on velocity error produces a corrective
//! acceleration. Disturbance compensation is added at the acceleration level,
//! then thrust and attitude are extracted algebraically from the commanded
//! acceleration and yaw (differential flatness), and a rotation-error P law
//! turns the desired attitude into body rates for the inner loop.
//!
//! The arm loop is a PD on the end-effector position in the arm frame whose
//! output velocity is converted to joint rates through the velocity inverse
//! kinematics; near a fold singularity the command is withheld.

use crate::delta::{self, ArmState, DeltaGeometry};
use crate::error::{ControlError, KinematicsError};
use crate::math::{gravity, vee, Mat3, Vec3};
use crate::plant::QuadState;
use serde::{Deserialize, Serialize};

/// Flat reference sample: position, velocity, acceleration, yaw, yaw rate.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrajectorySample {
    pub p: Vec3,
    pub v: Vec3,
    pub a: Vec3,
    pub yaw: f64,
    pub yaw_rate: f64,
}

impl TrajectorySample {
    pub fn setpoint(p: Vec3) -> Self {
        Self {
            p,
            ..Self::default()
        }
    }
}

/// Controller gains. Per-axis vectors for the translational loops, scalars
/// for attitude and the plant-side rate loop.
#[derive(Clone, Copy, Debug)]
pub struct Gains {
    pub kpp: Vec3,
    pub kvp: Vec3,
    pub kvi: Vec3,
    pub kvd: Vec3,
    pub kp_arm: Vec3,
    pub kd_arm: Vec3,
    pub k_att: f64,
    pub k_rate: f64,
    pub d_z: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            kpp: Vec3::repeat(3.0),
            kvp: Vec3::repeat(8.0),
            kvi: Vec3::repeat(2.0),
            kvd: Vec3::repeat(0.4),
            kp_arm: Vec3::repeat(8.0),
            kd_arm: Vec3::repeat(0.5),
            k_att: 35.0,
            k_rate: 1.8,
            d_z: 0.0,
        }
    }
}

/// Whether the thrust projection of the flatness block uses the current or
/// the desired body z axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThrustProjection {
    #[default]
    Current,
    Desired,
}

/// Attitude/thrust command for the inner loop.
#[derive(Clone, Copy, Debug)]
pub struct AttitudeThrustCmd {
    /// Mass-normalized thrust, m/s^2.
    pub t_spec: f64,
    pub r_des: Mat3,
    pub omega_d: Vec3,
}

/// Outer-loop memory: the velocity-error integral (clamped) and the filtered
/// derivative.
#[derive(Clone, Debug)]
pub struct OuterLoopState {
    pub v_integral: Vec3,
    pub integral_limit: Vec3,
    /// Derivative low-pass cutoff, Hz.
    pub deriv_lp_hz: f64,
    prev_v_err: Option<Vec3>,
    deriv: Vec3,
}

impl OuterLoopState {
    pub fn new(integral_limit: Vec3, deriv_lp_hz: f64) -> Self {
        Self {
            v_integral: Vec3::zeros(),
            integral_limit,
            deriv_lp_hz,
            prev_v_err: None,
            deriv: Vec3::zeros(),
        }
    }

    pub fn reset(&mut self) {
        self.v_integral = Vec3::zeros();
        self.prev_v_err = None;
        self.deriv = Vec3::zeros();
    }
}

fn clamp_vec(v: &Vec3, limit: &Vec3) -> Vec3 {
    Vec3::new(
        v.x.clamp(-limit.x, limit.x),
        v.y.clamp(-limit.y, limit.y),
        v.z.clamp(-limit.z, limit.z),
    )
}

/// Cascade PID outer loop: returns the corrective acceleration.
///
/// `v_cmd = v_d + Kpp o (p_d - p)`, then PID on `v_cmd - v` with a clamped
/// integral and a low-pass-filtered derivative of the velocity error. A
/// non-positive `dt` evaluates the law without touching the state.
pub fn outer_loop(
    state: &mut OuterLoopState,
    reference: &TrajectorySample,
    quad: &QuadState,
    gains: &Gains,
    dt: f64,
) -> Vec3 {
    let v_cmd = reference.v + gains.kpp.component_mul(&(reference.p - quad.p));
    let v_err = v_cmd - quad.v;
    if dt > 0.0 {
        state.v_integral =
            clamp_vec(&(state.v_integral + v_err * dt), &state.integral_limit.abs());
        if let Some(prev) = state.prev_v_err {
            let raw = (v_err - prev) / dt;
            let tau = 1.0 / (2.0 * std::f64::consts::PI * state.deriv_lp_hz);
            let alpha = dt / (tau + dt);
            state.deriv += alpha * (raw - state.deriv);
        }
        state.prev_v_err = Some(v_err);
    }
    gains.kvp.component_mul(&v_err)
        + gains.kvi.component_mul(&state.v_integral)
        + gains.kvd.component_mul(&state.deriv)
}

/// Commanded acceleration: reference feedforward plus the loop correction
/// minus the estimated disturbance per unit mass.
pub fn compose_acceleration(
    a_err: &Vec3,
    reference: &TrajectorySample,
    f_low: &Vec3,
    f_high: &Vec3,
    mass: f64,
) -> Vec3 {
    reference.a + a_err - (f_low + f_high) / mass
}

/// Thrust-vector magnitude floor below which the attitude is undefined.
pub const EPS_THRUST: f64 = 1e-6;

/// Differential-flatness attitude and thrust from the commanded acceleration.
///
/// The desired body z axis is the direction of `a_c - g` (thrust must cancel
/// gravity and produce the commanded acceleration); the body x axis is built
/// from the yaw heading. Thrust is the projection of `a_c - g + d_z*v` on the
/// body z axis, using the current attitude by default.
pub fn flatness_attitude_thrust(
    a_c: &Vec3,
    yaw: f64,
    quad: &QuadState,
    gains: &Gains,
    projection: ThrustProjection,
) -> Result<(Mat3, f64), ControlError> {
    let t_vec = a_c - gravity();
    let norm = t_vec.norm();
    if norm <= EPS_THRUST {
        return Err(ControlError::DegenerateThrust { norm });
    }
    let z_b_des = t_vec / norm;
    let y_c = Vec3::new(-yaw.sin(), yaw.cos(), 0.0);
    let x_raw = y_c.cross(&z_b_des);
    let x_norm = x_raw.norm();
    if x_norm < 1e-6 {
        return Err(ControlError::GimbalDegenerate { norm: x_norm });
    }
    let x_b_des = x_raw / x_norm;
    let y_b_des = z_b_des.cross(&x_b_des);
    let r_des = Mat3::from_columns(&[x_b_des, y_b_des, z_b_des]);

    let z_proj = match projection {
        ThrustProjection::Current => quad.r.column(2).into_owned(),
        ThrustProjection::Desired => z_b_des,
    };
    let t_spec = z_proj.dot(&(t_vec + gains.d_z * quad.v));
    Ok((r_des, t_spec))
}

/// Body-rate command from the attitude error plus yaw-rate feedforward,
/// clipped per axis to `rate_limit`.
pub fn body_rate_command(
    r: &Mat3,
    r_des: &Mat3,
    yaw_rate_ff: f64,
    gains: &Gains,
    rate_limit: f64,
) -> Vec3 {
    // rotation-error P law toward r_des, in the body frame
    let e_r = vee(&(0.5 * (r.transpose() * r_des - r_des.transpose() * r)));
    let ff = r.transpose() * r_des * Vec3::new(0.0, 0.0, yaw_rate_ff);
    let omega = gains.k_att * e_r + ff;
    clamp_vec(&omega, &Vec3::repeat(rate_limit))
}

/// Joint-rate command plus a saturation flag.
#[derive(Clone, Copy, Debug, Default)]
pub struct ArmCommand {
    pub rates: [f64; 3],
    pub saturated: bool,
}

/// Arm PD loop: feedforward velocity plus PD correction, converted to joint
/// rates via the velocity inverse kinematics and saturated at the servo rate
/// limit.
pub fn arm_velocity_command(
    p_ref: &Vec3,
    v_ref: &Vec3,
    arm: &ArmState,
    geom: &DeltaGeometry,
    gains: &Gains,
    servo_rate_limit: f64,
) -> Result<ArmCommand, KinematicsError> {
    let p_now = delta::forward_position(&arm.q, geom)?;
    let v_now = delta::forward_velocity_at(&arm.q, &arm.q_dot, &p_now, geom)?;
    let v_err = gains.kp_arm.component_mul(&(p_ref - p_now))
        + gains.kd_arm.component_mul(&(v_ref - v_now));
    let v_c = v_ref + v_err;
    let rates = delta::inverse_velocity(&arm.q, &p_now, &v_c, geom)?;
    let mut cmd = ArmCommand {
        rates,
        saturated: false,
    };
    for r in &mut cmd.rates {
        if r.abs() > servo_rate_limit {
            *r = r.clamp(-servo_rate_limit, servo_rate_limit);
            cmd.saturated = true;
        }
    }
    Ok(cmd)
}
