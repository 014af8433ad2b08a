//! Delta parallel-arm kinematics.
//!
//! The arm is three actuated upper arms on a static platform, each driving a
//! passive lower arm that connects to the (translating) end-effector plate.
//! Chain `i` lives in a vertical plane at azimuth `psi_i = (i-1)*pi/3` from
//! the arm-frame x axis. Positive servo angle `q_i` rotates the upper arm
//! downward, so the elbow of chain `i`, expressed in that chain's own frame,
//! is
//!
//! ```text
//! e_i = [ r_base - r_eff + l_upper*cos(q_i), 0, -l_upper*sin(q_i) ]
//! ```
//!
//! and the end-effector point `p` (arm frame, workspace at negative z)
//! satisfies `|| p - h_i || = l_lower` for all three chains, with
//! `h_i = phi_i^T * e_i` the elbow in the arm frame.
//!
//! Velocity kinematics use the compact closed form `M * p_dot = l_upper * V * q_dot`
//! where row `i` of `M` is `beta_i^T * phi_i` and `V` is diagonal with entries
//! `beta_i^T * alpha_dot_i`; `beta_i` is the unit lower-arm direction in the
//! chain frame and `alpha_dot_i = d(alpha_i)/dq_i` the elbow tangent. A
//! vanishing `V_ii` is a fold singularity: joint `i` can no longer produce
//! end-effector velocity and the inverse map is refused.

use crate::error::KinematicsError;
use crate::math::{Mat3, Vec3};
use crate::plant::QuadState;

/// Delta-arm geometry and the arm-level numerical guards.
#[derive(Clone, Debug)]
pub struct DeltaGeometry {
    /// Actuated upper-arm length, m.
    pub l_upper: f64,
    /// Passive lower-arm length, m.
    pub l_lower: f64,
    /// Circumcircle radius of the static platform, m.
    pub r_base: f64,
    /// Circumcircle radius of the end-effector plate, m.
    pub r_eff: f64,
    /// Arm-base origin in the body frame, m.
    pub p_mount: Vec3,
    /// Arm frame expressed in the body frame.
    pub r_mount: Mat3,
    /// Joint limits [min, max], rad, applied to every chain.
    pub q_min: f64,
    pub q_max: f64,
    /// Fold-singularity tolerance on |V_ii|.
    pub v_tol: f64,
    /// Maximum accepted condition number of M.
    pub cond_max: f64,
}

impl Default for DeltaGeometry {
    fn default() -> Self {
        Self {
            l_upper: 0.09,
            l_lower: 0.18,
            r_base: 0.06,
            r_eff: 0.025,
            p_mount: Vec3::new(0.0, 0.0, -0.05),
            r_mount: Mat3::identity(),
            q_min: -0.5,
            q_max: 1.9,
            v_tol: 1e-6,
            cond_max: 1e6,
        }
    }
}

impl DeltaGeometry {
    /// Shoulder offset `r_base - r_eff` shared by all chains.
    pub fn shoulder_offset(&self) -> f64 {
        self.r_base - self.r_eff
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.l_upper <= 0.0 || self.l_lower <= 0.0 || self.r_base <= 0.0 || self.r_eff <= 0.0 {
            return Err(KinematicsError::BadGeometry(
                "link lengths and platform radii must be positive".into(),
            ));
        }
        if self.l_lower <= self.shoulder_offset().abs() {
            return Err(KinematicsError::BadGeometry(
                "l_lower must exceed |r_base - r_eff| for a nonempty workspace".into(),
            ));
        }
        if self.q_min >= self.q_max {
            return Err(KinematicsError::BadGeometry("empty joint range".into()));
        }
        Ok(())
    }

    pub fn joint_in_limits(&self, q: &[f64; 3]) -> bool {
        q.iter().all(|qi| *qi >= self.q_min && *qi <= self.q_max)
    }
}

/// Servo angles and rates of the three chains.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmState {
    pub q: [f64; 3],
    pub q_dot: [f64; 3],
}

impl ArmState {
    pub fn at_angles(q: [f64; 3]) -> Self {
        Self { q, q_dot: [0.0; 3] }
    }
}

/// Velocity-kinematics matrices plus the per-chain vectors behind them.
#[derive(Clone, Debug)]
pub struct ArmJacobians {
    /// Rows are `beta_i^T * phi_i`.
    pub m: Mat3,
    /// Diagonal entries `beta_i^T * alpha_dot_i`.
    pub v_diag: Vec3,
    /// Unit lower-arm directions in the chain frames.
    pub beta: [Vec3; 3],
    /// Elbow positions in the chain frames.
    pub elbow: [Vec3; 3],
    /// Elbow tangents `d(alpha_i)/dq_i` in the chain frames.
    pub alpha_dot: [Vec3; 3],
    /// Chain-frame rotations `phi_i`.
    pub phi: [Mat3; 3],
}

impl ArmJacobians {
    /// V as a full (diagonal) matrix.
    pub fn v(&self) -> Mat3 {
        Mat3::from_diagonal(&self.v_diag)
    }

    pub fn min_abs_v(&self) -> f64 {
        self.v_diag.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()))
    }
}

/// End-effector pose/velocity in both the arm frame and the world frame.
#[derive(Clone, Copy, Debug)]
pub struct EndEffectorState {
    pub p_arm: Vec3,
    pub v_arm: Vec3,
    pub p_world: Vec3,
    pub v_world: Vec3,
}

/// Rotation mapping arm-frame vectors into the frame of chain `i`.
pub fn chain_rotation(i: usize) -> Mat3 {
    let psi = i as f64 * std::f64::consts::FRAC_PI_3;
    let (s, c) = psi.sin_cos();
    Mat3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Elbow of chain `i` in its own chain frame.
pub fn elbow_chain_frame(q_i: f64, geom: &DeltaGeometry) -> Vec3 {
    let (s, c) = q_i.sin_cos();
    Vec3::new(
        geom.shoulder_offset() + geom.l_upper * c,
        0.0,
        -geom.l_upper * s,
    )
}

/// Elbow of chain `i` in the arm frame.
pub fn elbow_arm_frame(i: usize, q_i: f64, geom: &DeltaGeometry) -> Vec3 {
    chain_rotation(i).transpose() * elbow_chain_frame(q_i, geom)
}

fn alpha_dot(q_i: f64) -> Vec3 {
    let (s, c) = q_i.sin_cos();
    Vec3::new(-s, 0.0, -c)
}

/// Largest per-chain violation of the loop-closure constraint, in meters:
/// `max_i | ||p - h_i|| - l_lower |`.
pub fn constraint_residual(p: &Vec3, q: &[f64; 3], geom: &DeltaGeometry) -> f64 {
    (0..3).fold(0.0_f64, |acc, i| {
        let h = elbow_arm_frame(i, q[i], geom);
        acc.max(((p - h).norm() - geom.l_lower).abs())
    })
}

/// Forward position kinematics: end-effector point in the arm frame.
///
/// Solves the three-sphere intersection around the elbows and returns the
/// branch below the elbow plane (the hanging configuration).
pub fn forward_position(q: &[f64; 3], geom: &DeltaGeometry) -> Result<Vec3, KinematicsError> {
    let c: Vec<Vec3> = (0..3).map(|i| elbow_arm_frame(i, q[i], geom)).collect();
    let l = geom.l_lower;

    // Trilateration in a frame adapted to the elbow triangle.
    let d12 = c[1] - c[0];
    let d = d12.norm();
    if d < 1e-12 {
        return Err(KinematicsError::NoSolution(
            "coincident elbows, intersection is degenerate".into(),
        ));
    }
    let ex = d12 / d;
    let d13 = c[2] - c[0];
    let ix = ex.dot(&d13);
    let ey_raw = d13 - ix * ex;
    let ey_norm = ey_raw.norm();
    if ey_norm < 1e-12 {
        return Err(KinematicsError::NoSolution("collinear elbows".into()));
    }
    let ey = ey_raw / ey_norm;
    let ez = ex.cross(&ey);
    let jy = ey.dot(&d13);

    // equal sphere radii: the radical planes reduce to these coordinates
    let x = 0.5 * d;
    let y = (ix * ix + jy * jy - 2.0 * ix * x) / (2.0 * jy);
    let z2 = l * l - x * x - y * y;
    if z2 < 0.0 {
        return Err(KinematicsError::NoSolution(format!(
            "spheres do not intersect (gap {:.3e} m)",
            (-z2).sqrt()
        )));
    }
    let z = z2.sqrt();
    let base = c[0] + x * ex + y * ey;
    let p_hi = base + z * ez;
    let p_lo = base - z * ez;
    let p = if p_lo.z <= p_hi.z { p_lo } else { p_hi };
    Ok(p)
}

/// True when every chain of `(q, p)` sits on the elbow-out branch that
/// [`inverse_position`] selects (the `phi - delta` solution of the per-chain
/// equation). Joint angles past the fold have an elbow-in twin with the same
/// end-effector point, which the inverse map deliberately does not return.
pub fn branch_consistent(p: &Vec3, q: &[f64; 3], geom: &DeltaGeometry) -> bool {
    let a_off = geom.shoulder_offset();
    let lu = geom.l_upper;
    for i in 0..3 {
        let pc = chain_rotation(i) * p;
        let a = 2.0 * lu * (pc.x - a_off);
        let b = -2.0 * lu * pc.z;
        let phi = b.atan2(a);
        let mut diff = q[i] - phi;
        while diff > std::f64::consts::PI {
            diff -= 2.0 * std::f64::consts::PI;
        }
        while diff < -std::f64::consts::PI {
            diff += 2.0 * std::f64::consts::PI;
        }
        if diff > 1e-9 {
            return false;
        }
    }
    true
}

/// Inverse position kinematics via the per-chain closed form
/// `A*cos(q) + B*sin(q) = C`, branch-matched to [`forward_position`]: of the
/// two per-chain solutions the elbow-out one (`phi - delta`) is returned.
pub fn inverse_position(p: &Vec3, geom: &DeltaGeometry) -> Result<[f64; 3], KinematicsError> {
    let a_off = geom.shoulder_offset();
    let lu = geom.l_upper;
    let ll = geom.l_lower;
    let mut q = [0.0; 3];
    for i in 0..3 {
        let pc = chain_rotation(i) * p;
        let a = 2.0 * lu * (pc.x - a_off);
        let b = -2.0 * lu * pc.z;
        let c = pc.norm_squared() - 2.0 * a_off * pc.x + a_off * a_off + lu * lu - ll * ll;
        let r_ab = a.hypot(b);
        if r_ab < 1e-14 {
            return Err(KinematicsError::Unreachable(format!(
                "chain {} has no angle dependence at this point",
                i + 1
            )));
        }
        let ratio = c / r_ab;
        if ratio.abs() > 1.0 + 1e-12 {
            return Err(KinematicsError::Unreachable(format!(
                "chain {} cannot close (|C|/R = {:.6})",
                i + 1,
                ratio.abs()
            )));
        }
        let delta = ratio.clamp(-1.0, 1.0).acos();
        let mut qi = b.atan2(a) - delta;
        if qi <= -std::f64::consts::PI {
            qi += 2.0 * std::f64::consts::PI;
        }
        q[i] = qi;
    }
    Ok(q)
}

/// Velocity-kinematics matrices at a consistent `(q, p)` pair.
pub fn arm_jacobians(
    q: &[f64; 3],
    p: &Vec3,
    geom: &DeltaGeometry,
) -> Result<ArmJacobians, KinematicsError> {
    let residual = constraint_residual(p, q, geom);
    if residual > 1e-6 {
        return Err(KinematicsError::InconsistentInput { residual });
    }
    let mut m = Mat3::zeros();
    let mut v_diag = Vec3::zeros();
    let mut beta = [Vec3::zeros(); 3];
    let mut elbow = [Vec3::zeros(); 3];
    let mut adot = [Vec3::zeros(); 3];
    let mut phi = [Mat3::zeros(); 3];
    for i in 0..3 {
        phi[i] = chain_rotation(i);
        elbow[i] = elbow_chain_frame(q[i], geom);
        let p_chain = phi[i] * p;
        beta[i] = (p_chain - elbow[i]) / geom.l_lower;
        adot[i] = alpha_dot(q[i]);
        let row = beta[i].transpose() * phi[i];
        m.set_row(i, &row);
        v_diag[i] = beta[i].dot(&adot[i]);
    }
    Ok(ArmJacobians {
        m,
        v_diag,
        beta,
        elbow,
        alpha_dot: adot,
        phi,
    })
}

/// End-effector velocity from joint rates: solves `M * p_dot = l_upper * V * q_dot`.
pub fn forward_velocity(
    q: &[f64; 3],
    q_dot: &[f64; 3],
    geom: &DeltaGeometry,
) -> Result<Vec3, KinematicsError> {
    let p = forward_position(q, geom)?;
    forward_velocity_at(q, q_dot, &p, geom)
}

/// As [`forward_velocity`] with the end-effector point already known.
pub fn forward_velocity_at(
    q: &[f64; 3],
    q_dot: &[f64; 3],
    p: &Vec3,
    geom: &DeltaGeometry,
) -> Result<Vec3, KinematicsError> {
    let jac = arm_jacobians(q, p, geom)?;
    let sv = jac.m.svd(false, false).singular_values;
    let cond = sv[0] / sv[2].max(f64::MIN_POSITIVE);
    if !cond.is_finite() || cond > geom.cond_max {
        return Err(KinematicsError::SingularM { cond });
    }
    let m_inv = jac
        .m
        .try_inverse()
        .ok_or(KinematicsError::SingularM { cond })?;
    let qd = Vec3::new(q_dot[0], q_dot[1], q_dot[2]);
    Ok(geom.l_upper * (m_inv * (jac.v() * qd)))
}

/// Joint rates that realize a desired arm-frame end-effector velocity:
/// `q_dot = V^-1 * M * v / l_upper`. Fails near a fold (`|V_ii| <= v_tol`).
pub fn inverse_velocity(
    q: &[f64; 3],
    p: &Vec3,
    v_desired: &Vec3,
    geom: &DeltaGeometry,
) -> Result<[f64; 3], KinematicsError> {
    let jac = arm_jacobians(q, p, geom)?;
    let min_v = jac.min_abs_v();
    if min_v <= geom.v_tol {
        return Err(KinematicsError::SingularV { min_v });
    }
    let mv = jac.m * v_desired;
    Ok([
        mv[0] / (geom.l_upper * jac.v_diag[0]),
        mv[1] / (geom.l_upper * jac.v_diag[1]),
        mv[2] / (geom.l_upper * jac.v_diag[2]),
    ])
}

/// End-effector position and velocity in both arm and world frames.
///
/// `p_world = p_quad + R*(p_mount + R_mount*p_arm)` and
/// `v_world = v_quad + omega_w x R*(p_mount + R_mount*p_arm) + R*R_mount*v_arm`
/// with `omega_w` the body rate expressed in the world frame.
pub fn world_pose_velocity(
    quad: &QuadState,
    arm: &ArmState,
    geom: &DeltaGeometry,
) -> Result<EndEffectorState, KinematicsError> {
    let p_arm = forward_position(&arm.q, geom)?;
    let v_arm = forward_velocity_at(&arm.q, &arm.q_dot, &p_arm, geom)?;
    let r_arm = quad.r * geom.r_mount;
    let offset_world = quad.r * geom.p_mount + r_arm * p_arm;
    let omega_world = quad.r * quad.omega;
    Ok(EndEffectorState {
        p_arm,
        v_arm,
        p_world: quad.p + offset_world,
        v_world: quad.v + omega_world.cross(&offset_world) + r_arm * v_arm,
    })
}
