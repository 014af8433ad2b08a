//! Ground-truth simulation of the vehicle.
//!
//! The quadrotor is a rigid body driven by mass-normalized collective thrust
//! along the body z axis and an inner rate loop modeled as proportional
//! computed torque. External forces (wind, payload reaction) enter the
//! translational equation directly; the payload itself is a point mass whose
//! reaction wrench is computed from its true world acceleration, so the force
//! the estimators are asked to reconstruct is exactly the force applied here.
//!
//! Integration is classic RK4 over the coupled state at the physics rate,
//! with the attitude block advanced as a raw matrix inside the stages and
//! projected back onto SO(3) after each step.

use crate::delta::{ArmState, DeltaGeometry};
use crate::error::PlantError;
use crate::math::{e3, gravity, hat, renormalize_rotation, Mat3, Vec3};
use crate::observers::Wrench;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Quadrotor rigid-body state. `r` maps body vectors to world vectors;
/// `omega` is the body-frame angular rate.
#[derive(Clone, Copy, Debug)]
pub struct QuadState {
    pub p: Vec3,
    pub v: Vec3,
    pub r: Mat3,
    pub omega: Vec3,
}

impl QuadState {
    pub fn hover_at(p: Vec3) -> Self {
        Self {
            p,
            v: Vec3::zeros(),
            r: Mat3::identity(),
            omega: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.r.iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
    }
}

/// Physical parameters of the vehicle and its actuators.
#[derive(Clone, Copy, Debug)]
pub struct QuadParams {
    /// Quadrotor-only mass, kg.
    pub m_b: f64,
    /// Manipulator mass rigidly attached to the base, kg.
    pub m_m: f64,
    /// Point-mass payload at the end-effector, kg.
    pub m_payload: f64,
    /// Diagonal inertia, kg m^2.
    pub j: Vec3,
    /// Rotor-drag coefficient used by the thrust law, 1/s.
    pub d_z: f64,
    /// Specific-thrust limits, m/s^2.
    pub t_min: f64,
    pub t_max: f64,
    /// Body-rate command limit, rad/s.
    pub rate_limit: f64,
    /// Inner rate-loop proportional gain, N m s.
    pub k_rate: f64,
    /// Servo velocity-lag time constant, s.
    pub servo_tau: f64,
    /// Servo rate limit, rad/s.
    pub servo_rate_limit: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            m_b: 1.2788,
            m_m: 0.1034,
            m_payload: 0.0,
            j: Vec3::new(0.012, 0.012, 0.02),
            d_z: 0.0,
            t_min: 1.0,
            t_max: 25.0,
            rate_limit: 6.0,
            k_rate: 1.8,
            servo_tau: 0.02,
            servo_rate_limit: 10.0,
        }
    }
}

impl QuadParams {
    /// Mass the thrust acts on (payload force enters through `f_ext`).
    pub fn total_mass(&self) -> f64 {
        self.m_b + self.m_m
    }
}

#[derive(Clone, Copy)]
struct Deriv {
    dp: Vec3,
    dv: Vec3,
    dr: Mat3,
    domega: Vec3,
}

fn advanced(s: &QuadState, d: &Deriv, h: f64) -> QuadState {
    QuadState {
        p: s.p + h * d.dp,
        v: s.v + h * d.dv,
        r: s.r + h * d.dr,
        omega: s.omega + h * d.domega,
    }
}

/// One physics step of the quadrotor under held commands and external wrench.
///
/// `t_spec` is clamped to the thrust limits; `tau_ext` is expressed in the
/// body frame. The external force is held constant over the step.
pub fn quadrotor_step(
    state: &QuadState,
    params: &QuadParams,
    t_spec: f64,
    omega_d: &Vec3,
    f_ext: &Vec3,
    tau_ext: &Vec3,
    dt: f64,
) -> Result<QuadState, PlantError> {
    let t = t_spec.clamp(params.t_min, params.t_max);
    let m = params.total_mass();
    let j = params.j;
    let deriv = |s: &QuadState| -> Deriv {
        let jw = Vec3::new(j.x * s.omega.x, j.y * s.omega.y, j.z * s.omega.z);
        let tau_cmd = params.k_rate * (omega_d - s.omega);
        let tau = tau_cmd + tau_ext - s.omega.cross(&jw);
        Deriv {
            dp: s.v,
            dv: t * (s.r * e3()) + gravity() + f_ext / m,
            dr: s.r * hat(&s.omega),
            domega: Vec3::new(tau.x / j.x, tau.y / j.y, tau.z / j.z),
        }
    };
    let k1 = deriv(state);
    let k2 = deriv(&advanced(state, &k1, 0.5 * dt));
    let k3 = deriv(&advanced(state, &k2, 0.5 * dt));
    let k4 = deriv(&advanced(state, &k3, dt));
    let mut next = QuadState {
        p: state.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp),
        v: state.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
        r: state.r + dt / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr),
        omega: state.omega + dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega),
    };
    next.r = renormalize_rotation(&next.r);
    if !next.is_finite() {
        return Err(PlantError::NonFinite {
            t: 0.0,
            what: "quadrotor state".into(),
        });
    }
    Ok(next)
}

/// True world-frame acceleration under the same model as [`quadrotor_step`],
/// used for the IMU sample.
pub fn true_acceleration(state: &QuadState, params: &QuadParams, t_spec: f64, f_ext: &Vec3) -> Vec3 {
    let t = t_spec.clamp(params.t_min, params.t_max);
    t * (state.r * e3()) + gravity() + f_ext / params.total_mass()
}

/// Wrench the payload exerts on the vehicle, given the payload's true world
/// acceleration: `f = -m_p * (a - g)` (static weight included). Force and
/// torque are in the world frame; `lever_body` is the attachment point in
/// the body frame.
pub fn reaction_wrench(
    a_payload_world: &Vec3,
    m_payload: f64,
    lever_body: &Vec3,
    r_body_world: &Mat3,
) -> Wrench {
    let f = -m_payload * (a_payload_world - gravity());
    let lever_world = r_body_world * lever_body;
    Wrench {
        f,
        tau: lever_world.cross(&f),
    }
}

/// One servo step: rates follow the clipped command through an exact
/// first-order lag, angles integrate the updated rates, and joint limits
/// zero the offending rate on contact.
pub fn servo_step(
    arm: &ArmState,
    omega_cmd: &[f64; 3],
    params: &QuadParams,
    geom: &DeltaGeometry,
    dt: f64,
) -> ArmState {
    let decay = 1.0 - (-dt / params.servo_tau).exp();
    let mut next = *arm;
    for i in 0..3 {
        let u = omega_cmd[i].clamp(-params.servo_rate_limit, params.servo_rate_limit);
        next.q_dot[i] += (u - next.q_dot[i]) * decay;
        next.q[i] += next.q_dot[i] * dt;
        if next.q[i] <= geom.q_min {
            next.q[i] = geom.q_min;
            next.q_dot[i] = next.q_dot[i].max(0.0);
        } else if next.q[i] >= geom.q_max {
            next.q[i] = geom.q_max;
            next.q_dot[i] = next.q_dot[i].min(0.0);
        }
    }
    next
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindKind {
    Constant,
    Step,
    Sine,
    GustMix,
}

/// Deterministic wind force as a function of time.
#[derive(Clone, Copy, Debug)]
pub struct WindModel {
    pub kind: WindKind,
    pub f_const: Vec3,
    pub amplitude: Vec3,
    pub freq_hz: f64,
    pub t_step: f64,
}

impl Default for WindModel {
    fn default() -> Self {
        Self {
            kind: WindKind::Constant,
            f_const: Vec3::zeros(),
            amplitude: Vec3::zeros(),
            freq_hz: 0.0,
            t_step: 0.0,
        }
    }
}

/// Wind force at time `t`, N in the world frame.
pub fn wind_force(model: &WindModel, t: f64) -> Vec3 {
    let sine = model.amplitude * (2.0 * std::f64::consts::PI * model.freq_hz * t).sin();
    match model.kind {
        WindKind::Constant => model.f_const,
        WindKind::Step => {
            if t >= model.t_step {
                model.f_const
            } else {
                Vec3::zeros()
            }
        }
        WindKind::Sine => sine,
        WindKind::GustMix => {
            let base = if t >= model.t_step {
                model.f_const
            } else {
                Vec3::zeros()
            };
            base + sine
        }
    }
}

/// Accelerometer model: true acceleration plus white noise.
#[derive(Clone, Copy, Debug)]
pub struct Imu {
    pub accel_noise_std: f64,
}

impl Imu {
    pub fn sample<R: Rng>(&self, a_true: &Vec3, rng: &mut R) -> Vec3 {
        if self.accel_noise_std == 0.0 {
            return *a_true;
        }
        let n = Normal::new(0.0, self.accel_noise_std).expect("std must be finite");
        a_true + Vec3::new(n.sample(rng), n.sample(rng), n.sample(rng))
    }
}
