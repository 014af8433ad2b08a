//! Frame conventions and 3-vector / rotation primitives shared by all modules.
//!
//! Conventions, fixed once here and restated nowhere else:
//!
//! * World frame is right-handed, z-up. Gravity is the signed vector
//!   `(0, 0, -9.80665)` m/s².
//! * Body frame is x-forward / y-left / z-up along the thrust axis, so the
//!   rotor force on the vehicle is `T * R * e3` with `T >= 0` and `R` the
//!   body-to-world rotation.
//! * Translational dynamics are written `m * a = T_spec * m * R * e3 + m * g + f_ext`,
//!   i.e. external forces appear with a plus sign. Observer and controller
//!   contracts in the other modules assume this same sign convention.
//! * The delta-arm frame is rigidly mounted under the body with axes parallel
//!   to the body axes; the arm workspace sits at negative arm-frame z.
//!
//! Attitude lives on the rotation group: rotation matrices are advanced with
//! the exponential map ([`integrate_rotation`]) and re-orthonormalized through
//! a quaternion round trip ([`renormalize_rotation`]).

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

/// 3-vector of f64; units depend on context (m, m/s, N, rad/s, ...).
pub type Vec3 = Vector3<f64>;
/// Row-major 3x3 matrix of f64. Rotation matrices are carried in this type
/// and kept orthonormal by construction.
pub type Mat3 = Matrix3<f64>;

/// Standard gravity magnitude, m/s².
pub const GRAVITY: f64 = 9.80665;

/// Signed gravity vector in the world frame (z-up), m/s².
pub fn gravity() -> Vec3 {
    Vec3::new(0.0, 0.0, -GRAVITY)
}

/// World/body z axis unit vector.
pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// Skew-symmetric (hat) matrix of `v`, so `hat(v) * w == v.cross(&w)`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`] on the skew-symmetric part of `m`.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Rodrigues formula: `exp(hat(w))` for a rotation vector `w` (axis * angle).
///
/// Falls back to the second-order series below 1e-8 rad where the
/// trigonometric form loses precision.
pub fn rotation_exp(w: &Vec3) -> Mat3 {
    let theta = w.norm();
    let w_hat = hat(w);
    if theta < 1e-8 {
        return Mat3::identity() + w_hat + 0.5 * w_hat * w_hat;
    }
    let a = theta.sin() / theta;
    let b = (1.0 - theta.cos()) / (theta * theta);
    Mat3::identity() + a * w_hat + b * w_hat * w_hat
}

/// One exact exponential-map attitude step: returns `R * exp(hat(omega * dt))`
/// with `omega` in the body frame, re-orthonormalized.
pub fn integrate_rotation(r: &Mat3, omega: &Vec3, dt: f64) -> Mat3 {
    renormalize_rotation(&(r * rotation_exp(&(omega * dt))))
}

/// Projects a near-rotation matrix back onto SO(3) via a quaternion round
/// trip. Input must be within ~1e-3 of a rotation; the output is orthonormal
/// to machine precision with det +1.
pub fn renormalize_rotation(m: &Mat3) -> Mat3 {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m));
    // from_rotation_matrix trusts its input; renormalize explicitly
    UnitQuaternion::new_normalize(q.into_inner())
        .to_rotation_matrix()
        .into_inner()
}

/// Max-norm of `R^T R - I`; zero for a perfectly orthonormal matrix.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    let e = r.transpose() * r - Mat3::identity();
    e.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// ZYX Euler angles (yaw, pitch, roll) of a rotation matrix, for telemetry.
pub fn yaw_pitch_roll(r: &Mat3) -> (f64, f64, f64) {
    let (roll, pitch, yaw) = Rotation3::from_matrix_unchecked(*r).euler_angles();
    (yaw, pitch, roll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hat_of_zero_is_zero() {
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn hat_matches_cross_product() {
        // unit case from the definition
        let z = Vec3::new(0.0, 0.0, 1.0);
        let x = Vec3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(hat(&z) * x, Vec3::new(0.0, 1.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v = Vec3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let w = Vec3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            assert_relative_eq!(hat(&v) * w, v.cross(&w), epsilon = 1e-14);
        }
    }

    #[test]
    fn hat_is_antisymmetric_and_vee_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let v = Vec3::from_fn(|_, _| rng.gen_range(-5.0..5.0));
            let h = hat(&v);
            assert_eq!(h.transpose(), -h);
            assert_relative_eq!(vee(&h), v, epsilon = 1e-14);
        }
    }

    #[test]
    fn integrate_rotation_identity_cases() {
        let r = integrate_rotation(&Mat3::identity(), &Vec3::zeros(), 0.37);
        assert_relative_eq!(r, Mat3::identity(), epsilon = 1e-15);

        // quarter turn about z maps x to y
        let r = integrate_rotation(
            &Mat3::identity(),
            &Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
            1.0,
        );
        assert_relative_eq!(r * Vec3::x(), Vec3::y(), epsilon = 1e-12);
    }

    #[test]
    fn integrate_rotation_long_run_stays_orthonormal() {
        // 10 s of constant body rate at 1 kHz; oracle is the one-shot
        // exponential of the accumulated rotation vector (valid because the
        // increments commute for constant omega).
        let omega = Vec3::new(1.3, -0.7, 2.1);
        let dt = 1e-3;
        let mut r = Mat3::identity();
        for _ in 0..10_000 {
            r = integrate_rotation(&r, &omega, dt);
        }
        assert!(orthonormality_error(&r) < 1e-8);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-10);

        let oracle = rotation_exp(&(omega * 10.0));
        assert_relative_eq!(r, oracle, epsilon = 1e-7);
    }

    #[test]
    fn integrate_rotation_composes_for_constant_rate() {
        let omega = Vec3::new(0.4, 0.2, -0.9);
        let dt = 0.01;
        let n = 250;
        let mut stepped = Mat3::identity();
        for _ in 0..n {
            stepped = integrate_rotation(&stepped, &omega, dt);
        }
        let one_shot = integrate_rotation(&Mat3::identity(), &omega, n as f64 * dt);
        assert_relative_eq!(stepped, one_shot, epsilon = 1e-10);
    }

    #[test]
    fn renormalize_fixes_drift() {
        let mut r = rotation_exp(&Vec3::new(0.3, -1.1, 0.5));
        // inject drift
        r[(0, 0)] += 1e-6;
        r[(2, 1)] -= 1e-6;
        let fixed = renormalize_rotation(&r);
        assert!(orthonormality_error(&fixed) < 1e-12);
        assert_relative_eq!(fixed.determinant(), 1.0, epsilon = 1e-12);
    }
}
