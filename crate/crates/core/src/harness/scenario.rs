//! Closed-loop scenario runner.
//!
//! Physics and sensing run at the sensor rate (default 1 kHz), control at
//! the control rate (default 100 Hz) with zero-order hold between ticks.
//! Within one run everything is single-threaded and seeded, so identical
//! configurations produce bit-identical telemetry.

use crate::control::{
    arm_velocity_command, body_rate_command, compose_acceleration, flatness_attitude_thrust,
    outer_loop, AttitudeThrustCmd, OuterLoopState, TrajectorySample,
};
use crate::delta::{self, ArmState, DeltaGeometry};
use crate::error::{HarnessError, KinematicsError, PlantError};
use crate::harness::config::{ScenarioConfig, ScenarioKind};
use crate::harness::metrics::{compute_metrics, MetricsReport, SecondaryStats};
use crate::harness::telemetry::{TelemetryRow, TelemetrySink};
use crate::harness::trajectory::{gen_trajectory, TrajParams};
use crate::math::{yaw_pitch_roll, Vec3};
use crate::observers::{
    arm_acceleration_estimate, end_effector_force, high_torque, highpass_step, HighPassState,
    Ndob, Wrench,
};
use crate::plant::{
    quadrotor_step, reaction_wrench, servo_step, true_acceleration, wind_force, QuadState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Smoothing time constant of the payload-acceleration ground truth
/// (one-pole, ~25 Hz), part of the plant-side coupling model.
const REACTION_SMOOTH_TAU: f64 = 1.0 / (2.0 * std::f64::consts::PI * 25.0);

/// Cap on the compensation feedforward velocity handed to the arm, m/s.
const MAX_ARM_FF_SPEED: f64 = 0.5;

/// What the arm tracks during a run.
enum ArmMode {
    /// Its own arm-frame trajectory (the disturbance-rejection scan).
    Scan(TrajParams),
    /// A world-frame target (trajectory or fixed point) reached by
    /// compensating the current quad pose.
    Compensate(WorldTarget),
    /// Hold the home position.
    Hold,
}

enum WorldTarget {
    Traj(TrajParams),
    Point(Vec3),
}

impl WorldTarget {
    fn sample(&self, t: f64) -> TrajectorySample {
        match self {
            Self::Traj(p) => gen_trajectory(p, t),
            Self::Point(p) => TrajectorySample::setpoint(*p),
        }
    }
}

/// Everything a finished run leaves behind besides the telemetry stream.
pub struct RunArtifacts {
    pub report: MetricsReport,
    /// Joint-rate commands withheld because the arm was at a fold.
    pub singular_skips: usize,
    /// Servo steps reverted because the linkage would have bound.
    pub bind_stalls: usize,
}

struct Errors {
    primary: Vec<Vec3>,
    secondary: Vec<Vec3>,
}

/// Runs one scenario to completion, streaming telemetry into `sink`.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    sink: &mut dyn TelemetrySink,
) -> Result<RunArtifacts, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();

    let geom = cfg.geometry();
    let params = cfg.quad_params();
    let gains = cfg.gains();
    let wind = cfg.wind_model();
    let imu = cfg.imu();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.scenario.seed);

    let dt_phys = 1.0 / cfg.observers.sensor_rate_hz;
    let dt_ctrl = 1.0 / cfg.observers.control_rate_hz;
    let steps_per_ctrl =
        (cfg.observers.sensor_rate_hz / cfg.observers.control_rate_hz).round() as usize;
    let n_ctrl = (cfg.duration() * cfg.observers.control_rate_hz).round() as usize;

    let quad_traj = cfg.quad_trajectory()?;
    let ee_offset = geom.p_mount + geom.r_mount * cfg.arm_home();
    let arm_mode = match cfg.scenario.kind {
        ScenarioKind::DisturbanceRejection => ArmMode::Scan(cfg.arm_scan()),
        ScenarioKind::TrajectoryCompensation => {
            // the end-effector tracks the same path, displaced by the rigid
            // stack offset at the nominal attitude
            let mut traj = quad_traj;
            traj.center += ee_offset;
            ArmMode::Compensate(WorldTarget::Traj(traj))
        }
        ScenarioKind::EeStabilization => {
            let hold = cfg
                .trajectory
                .hold_point
                .map(|p| Vec3::new(p[0], p[1], p[2]))
                .unwrap_or(quad_traj.center + ee_offset);
            ArmMode::Compensate(WorldTarget::Point(hold))
        }
        ScenarioKind::Custom => ArmMode::Hold,
    };

    // initial state: quad engaged on its reference, arm closed on its
    // first target
    let ref0 = gen_trajectory(&quad_traj, 0.0);
    let mut quad = QuadState::hover_at(ref0.p);
    quad.v = ref0.v;
    let arm_target0 = match &arm_mode {
        ArmMode::Scan(scan) => gen_trajectory(scan, 0.0).p,
        ArmMode::Compensate(target) => {
            compensation_target(&target.sample(0.0), &quad, &geom, cfg).0
        }
        ArmMode::Hold => cfg.arm_home(),
    };
    let mut arm = ArmState::at_angles(
        delta::inverse_position(&arm_target0, &geom).map_err(HarnessError::Kinematics)?,
    );

    let mut ndob = Ndob::new(cfg.ndob_config())?;
    ndob.reset();
    let mut hp = HighPassState::new(cfg.hp_cutoff_hz());
    let mut outer = OuterLoopState::new(
        Vec3::new(
            cfg.control.integral_limit[0],
            cfg.control.integral_limit[1],
            cfg.control.integral_limit[2],
        ),
        cfg.control.deriv_lp_hz,
    );

    let mut f_low_filtered = Vec3::zeros();
    let mut last_f_ext = Vec3::zeros();
    let mut prev_payload_v: Option<Vec3> = None;
    let mut payload_accel = Vec3::zeros();
    let mut singular_skips = 0usize;
    let mut bind_stalls = 0usize;
    let mut errors = Errors {
        primary: Vec::with_capacity(n_ctrl),
        secondary: Vec::with_capacity(n_ctrl),
    };

    let m_comp = cfg.compensation_mass();

    for tick in 0..n_ctrl {
        let t = tick as f64 * dt_ctrl;
        let quad_ref = gen_trajectory(&quad_traj, t);

        // arm reference in the arm frame
        let (arm_p_ref, arm_v_ref) = match &arm_mode {
            ArmMode::Scan(scan) => {
                let s = gen_trajectory(scan, t);
                (s.p, s.v)
            }
            ArmMode::Compensate(target) => {
                compensation_target(&target.sample(t), &quad, &geom, cfg)
            }
            ArmMode::Hold => (cfg.arm_home(), Vec3::zeros()),
        };

        // high-frequency channel runs on the 100 Hz servo feedback
        let ee_feedback = delta::world_pose_velocity(&quad, &arm, &geom)
            .map_err(HarnessError::Kinematics)?;
        let a_arm = arm_acceleration_estimate(&mut hp, &ee_feedback.v_arm, dt_ctrl);
        let f_end = end_effector_force(&(quad.r * geom.r_mount), &a_arm, params.m_payload);
        // f_end is the payload's inertial force; the force acting on the
        // vehicle is its reaction, which is what f_ext means in the z-up
        // convention shared with the observer
        let f_high = highpass_step(&mut hp, &(-f_end), dt_ctrl);
        let lever_body = geom.p_mount + geom.r_mount * ee_feedback.p_arm;
        let tau_high = high_torque(&(quad.r.transpose() * f_high), &lever_body);

        // disturbance terms the controller is allowed to see
        let ablation = cfg.scenario.ablation;
        let f_low_used = if ablation.use_ndob() {
            f_low_filtered
        } else {
            Vec3::zeros()
        };
        let f_high_used = if ablation.use_high_freq() {
            f_high
        } else {
            Vec3::zeros()
        };

        // quadrotor cascade
        let a_err = outer_loop(&mut outer, &quad_ref, &quad, &gains, dt_ctrl);
        let a_c = compose_acceleration(&a_err, &quad_ref, &f_low_used, &f_high_used, m_comp);
        let (r_des, t_spec) = flatness_attitude_thrust(
            &a_c,
            quad_ref.yaw,
            &quad,
            &gains,
            cfg.control.thrust_projection,
        )
        .map_err(HarnessError::Control)?;
        let mut omega_d =
            body_rate_command(&quad.r, &r_des, quad_ref.yaw_rate, &gains, params.rate_limit);
        if cfg.control.rate_ff && ablation.use_high_freq() {
            // cancel the estimated fast torque at the rate loop
            omega_d -= quad.r.transpose() * tau_high / params.k_rate.max(1e-9);
        }
        let cmd = AttitudeThrustCmd {
            t_spec: t_spec.clamp(params.t_min, params.t_max),
            r_des,
            omega_d,
        };

        // arm command; a fold singularity withholds the command
        let arm_rates = match arm_velocity_command(
            &arm_p_ref,
            &arm_v_ref,
            &arm,
            &geom,
            &gains,
            params.servo_rate_limit,
        ) {
            Ok(c) => c.rates,
            Err(KinematicsError::SingularV { .. }) => {
                singular_skips += 1;
                [0.0; 3]
            }
            Err(e) => return Err(HarnessError::Kinematics(e)),
        };

        // telemetry before stepping, one row per control tick
        let (yaw, pitch, roll) = yaw_pitch_roll(&quad.r);
        sink.record(&TelemetryRow {
            t,
            p: quad.p,
            v: quad.v,
            yaw,
            pitch,
            roll,
            q: arm.q,
            ee_world: ee_feedback.p_world,
            f_low: f_low_filtered,
            f_high,
            f_ext_true: last_f_ext,
            t_spec: cmd.t_spec,
            omega_d: cmd.omega_d,
        })?;

        // error bookkeeping after the transient
        if t >= cfg.scenario.metrics_skip_s {
            match cfg.scenario.kind {
                ScenarioKind::DisturbanceRejection | ScenarioKind::Custom => {
                    errors.primary.push(quad.p - quad_ref.p);
                }
                ScenarioKind::TrajectoryCompensation => {
                    if let ArmMode::Compensate(target) = &arm_mode {
                        errors.primary.push(ee_feedback.p_world - target.sample(t).p);
                    }
                    errors.secondary.push(quad.p - quad_ref.p);
                }
                ScenarioKind::EeStabilization => {
                    if let ArmMode::Compensate(target) = &arm_mode {
                        errors.primary.push(ee_feedback.p_world - target.sample(t).p);
                    }
                    // base motion relative to its initial position
                    errors.secondary.push(quad.p - ref0.p);
                }
            }
        }

        // physics + sensing between control ticks
        for sub in 0..steps_per_ctrl {
            let t_phys = t + sub as f64 * dt_phys;
            let ee = delta::world_pose_velocity(&quad, &arm, &geom)
                .map_err(HarnessError::Kinematics)?;
            let a_raw = match prev_payload_v.replace(ee.v_world) {
                Some(prev) => (ee.v_world - prev) / dt_phys,
                None => Vec3::zeros(),
            };
            // The differenced payload acceleration closes a one-step-delayed
            // feedback loop through the reaction wrench (effective rotational
            // gain m_p*r^2/J exceeds one), so it is smoothed with a pole far
            // above the arm dynamics before the wrench is formed.
            let alpha = dt_phys / (REACTION_SMOOTH_TAU + dt_phys);
            payload_accel += alpha * (a_raw - payload_accel);
            let lever = geom.p_mount + geom.r_mount * ee.p_arm;
            let reaction = if params.m_payload > 0.0 {
                reaction_wrench(&payload_accel, params.m_payload, &lever, &quad.r)
            } else {
                Wrench::zero()
            };
            let f_ext = wind_force(&wind, t_phys) + reaction.f;
            let tau_ext_body = quad.r.transpose() * reaction.tau;
            last_f_ext = f_ext;

            let a_true = true_acceleration(&quad, &params, cmd.t_spec, &f_ext);
            quad = quadrotor_step(
                &quad,
                &params,
                cmd.t_spec,
                &cmd.omega_d,
                &f_ext,
                &tau_ext_body,
                dt_phys,
            )
            .map_err(|e| match e {
                PlantError::NonFinite { what, .. } => {
                    HarnessError::NumericalAbort(PlantError::NonFinite { t: t_phys, what })
                }
            })?;
            let stepped = servo_step(&arm, &arm_rates, &params, &geom, dt_phys);
            if delta::forward_position(&stepped.q, &geom).is_ok() {
                arm = stepped;
            } else {
                // linkage would bind: servos stall against the structure
                arm.q_dot = [0.0; 3];
                bind_stalls += 1;
            }

            let a_meas = imu.sample(&a_true, &mut rng);
            f_low_filtered = ndob.step(&a_meas, cmd.t_spec, &quad.r, dt_phys)?;
        }
    }

    let primary = compute_metrics(&errors.primary)?;
    let secondary = if errors.secondary.is_empty() {
        None
    } else {
        Some(SecondaryStats {
            label: match cfg.scenario.kind {
                ScenarioKind::TrajectoryCompensation => "quad_tracking".into(),
                _ => "quad_deviation".into(),
            },
            stats: compute_metrics(&errors.secondary)?,
        })
    };

    let report = MetricsReport {
        scenario: cfg.scenario.kind.as_str().to_string(),
        ablation: cfg.scenario.ablation.as_str().to_string(),
        primary,
        secondary,
        seed: cfg.scenario.seed,
        duration_s: cfg.duration(),
        runtime_s: started.elapsed().as_secs_f64(),
        config: cfg.to_toml_value(),
    };
    Ok(RunArtifacts {
        report,
        singular_skips,
        bind_stalls,
    })
}

/// Arm-frame target and feedforward velocity that place the end-effector on
/// a world-frame reference given the current quad pose, clamped to the
/// usable workspace.
fn compensation_target(
    reference: &TrajectorySample,
    quad: &QuadState,
    geom: &DeltaGeometry,
    cfg: &ScenarioConfig,
) -> (Vec3, Vec3) {
    let rel_body = quad.r.transpose() * (reference.p - quad.p) - geom.p_mount;
    let mut p_arm = geom.r_mount.transpose() * rel_body;

    // d/dt of R^T (p_ref - p_quad) with body-frame omega
    let delta_w = reference.p - quad.p;
    let v_body = quad.r.transpose() * (reference.v - quad.v)
        - quad.omega.cross(&(quad.r.transpose() * delta_w));
    let mut v_arm = geom.r_mount.transpose() * v_body;
    // the arm corrects centimeter-scale errors; cap the feedforward so a
    // large transient cannot slew the linkage toward a binding pose
    let v_norm = v_arm.norm();
    if v_norm > MAX_ARM_FF_SPEED {
        v_arm *= MAX_ARM_FF_SPEED / v_norm;
    }

    // cylindrical workspace clamp
    let radius = p_arm.xy().norm();
    if radius > cfg.arm.workspace_radius {
        let scale = cfg.arm.workspace_radius / radius;
        p_arm.x *= scale;
        p_arm.y *= scale;
    }
    p_arm.z = p_arm.z.clamp(cfg.arm.workspace_z[0], cfg.arm.workspace_z[1]);
    (p_arm, v_arm)
}

/// Convenience wrapper: runs and returns both the report and the rows.
pub fn run_scenario_to_vec(
    cfg: &ScenarioConfig,
) -> Result<(RunArtifacts, Vec<TelemetryRow>), HarnessError> {
    let mut sink = crate::harness::telemetry::VecSink::default();
    let artifacts = run_scenario(cfg, &mut sink)?;
    Ok((artifacts, sink.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{Ablation, ScenarioConfig};

    fn hover_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.kind = ScenarioKind::Custom;
        cfg.scenario.duration_s = Some(8.0);
        cfg.scenario.metrics_skip_s = 2.0;
        cfg
    }

    #[test]
    fn hover_without_disturbance_is_millimeter_tight() {
        for ablation in [Ablation::Baseline, Ablation::NdobOnly, Ablation::Full] {
            let mut cfg = hover_config();
            cfg.scenario.ablation = ablation;
            let (artifacts, rows) = run_scenario_to_vec(&cfg).unwrap();
            assert!(
                artifacts.report.primary.rmse_m < 1e-3,
                "hover RMSE {} under {:?}",
                artifacts.report.primary.rmse_m,
                ablation
            );
            // row count = duration * control rate
            assert_eq!(rows.len(), 800);
            assert_eq!(artifacts.singular_skips, 0);
        }
    }

    #[test]
    fn telemetry_row_cadence_and_columns() {
        let mut cfg = hover_config();
        cfg.scenario.duration_s = Some(1.0);
        cfg.scenario.metrics_skip_s = 0.5;
        let (_, rows) = run_scenario_to_vec(&cfg).unwrap();
        assert_eq!(rows.len(), 100);
        assert!((rows[1].t - rows[0].t - 0.01).abs() < 1e-12);
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let mut cfg = hover_config();
        cfg.scenario.duration_s = Some(2.0);
        cfg.scenario.metrics_skip_s = 0.5;
        cfg.quad.m_payload = 0.2;
        cfg.scenario.kind = ScenarioKind::DisturbanceRejection;
        let (a1, r1) = run_scenario_to_vec(&cfg).unwrap();
        let (a2, r2) = run_scenario_to_vec(&cfg).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(a1.report.primary.rmse_m.to_bits(), a2.report.primary.rmse_m.to_bits());

        let mut other = cfg.clone();
        other.scenario.seed = 99;
        let (_, r3) = run_scenario_to_vec(&other).unwrap();
        assert_ne!(r1, r3);
    }

    #[test]
    fn payload_weight_is_picked_up_by_the_observer() {
        let mut cfg = hover_config();
        cfg.scenario.kind = ScenarioKind::DisturbanceRejection;
        cfg.scenario.duration_s = Some(6.0);
        cfg.quad.m_payload = 0.4;
        cfg.trajectory.scan_speed = 0.0001; // essentially static arm
        let (_, rows) = run_scenario_to_vec(&cfg).unwrap();
        let last = rows.last().unwrap();
        // payload weight ~3.92 N downward must appear in the estimate
        assert!(
            (last.f_low.z + 0.4 * crate::math::GRAVITY).abs() < 0.25,
            "f_low_z = {}",
            last.f_low.z
        );
    }
}
