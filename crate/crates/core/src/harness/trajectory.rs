//! Analytic reference trajectories. Position, velocity and acceleration are
//! exact derivatives of each other by construction.

use crate::control::TrajectorySample;
use crate::error::HarnessError;
use crate::math::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajKind {
    Setpoint,
    Circle,
    Lemniscate,
    LineScan,
}

/// Parameters for [`gen_trajectory`]. Unused fields are ignored per kind.
#[derive(Clone, Copy, Debug)]
pub struct TrajParams {
    pub kind: TrajKind,
    /// Center point (setpoint position for `Setpoint`).
    pub center: Vec3,
    /// Circle diameter, m.
    pub diameter: f64,
    /// Path speed, m/s: tangential speed for `Circle`, peak speed for
    /// `Lemniscate` and `LineScan`.
    pub speed: f64,
    /// Lemniscate half-lengths along x and y, m.
    pub half_len_x: f64,
    pub half_len_y: f64,
    /// Scan direction (normalized internally) and half-length, m.
    pub scan_axis: Vec3,
    pub scan_half_len: f64,
    /// Duration of the smooth velocity reversal at each scan end, s.
    pub scan_turn_s: f64,
    pub yaw: f64,
}

impl TrajParams {
    pub fn setpoint(p: Vec3) -> Self {
        Self {
            kind: TrajKind::Setpoint,
            center: p,
            diameter: 0.0,
            speed: 0.0,
            half_len_x: 0.0,
            half_len_y: 0.0,
            scan_axis: Vec3::x(),
            scan_half_len: 0.0,
            scan_turn_s: 0.15,
            yaw: 0.0,
        }
    }

    pub fn circle(center: Vec3, diameter: f64, speed: f64) -> Self {
        Self {
            kind: TrajKind::Circle,
            diameter,
            speed,
            ..Self::setpoint(center)
        }
    }

    pub fn lemniscate(center: Vec3, half_len_x: f64, half_len_y: f64, speed_cap: f64) -> Self {
        Self {
            kind: TrajKind::Lemniscate,
            half_len_x,
            half_len_y,
            speed: speed_cap,
            ..Self::setpoint(center)
        }
    }

    pub fn line_scan(center: Vec3, axis: Vec3, half_len: f64, speed: f64, turn_s: f64) -> Self {
        Self {
            kind: TrajKind::LineScan,
            scan_axis: axis,
            scan_half_len: half_len,
            speed,
            scan_turn_s: turn_s,
            ..Self::setpoint(center)
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::InvalidParams(msg.into()));
        if !self.center.iter().all(|x| x.is_finite()) {
            return bad("center must be finite");
        }
        if self.speed < 0.0 {
            return bad("speed must be nonnegative");
        }
        match self.kind {
            TrajKind::Setpoint => Ok(()),
            TrajKind::Circle => {
                if self.diameter <= 0.0 {
                    bad("circle diameter must be positive")
                } else {
                    Ok(())
                }
            }
            TrajKind::Lemniscate => {
                if self.half_len_x <= 0.0 || self.half_len_y <= 0.0 {
                    bad("lemniscate half-lengths must be positive")
                } else {
                    Ok(())
                }
            }
            TrajKind::LineScan => {
                if self.scan_half_len <= 0.0 {
                    bad("scan half-length must be positive")
                } else if self.scan_axis.norm() < 1e-12 {
                    bad("scan axis must be nonzero")
                } else if self.scan_turn_s <= 0.0 {
                    bad("scan turnaround time must be positive")
                } else if self.speed > 0.0
                    && self.speed * self.scan_turn_s / std::f64::consts::PI
                        >= self.scan_half_len
                {
                    bad("turnaround excursion exceeds the scan half-length")
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Reference sample at time `t`.
pub fn gen_trajectory(params: &TrajParams, t: f64) -> TrajectorySample {
    match params.kind {
        TrajKind::Setpoint => TrajectorySample {
            p: params.center,
            yaw: params.yaw,
            ..TrajectorySample::default()
        },
        TrajKind::Circle => {
            let r = 0.5 * params.diameter;
            let theta_dot = params.speed / r;
            let theta = theta_dot * t;
            let (s, c) = theta.sin_cos();
            TrajectorySample {
                p: params.center + r * Vec3::new(c, s, 0.0),
                v: r * theta_dot * Vec3::new(-s, c, 0.0),
                a: -r * theta_dot * theta_dot * Vec3::new(c, s, 0.0),
                yaw: params.yaw,
                yaw_rate: 0.0,
            }
        }
        TrajKind::Lemniscate => {
            // Gerono lemniscate at constant angular rate, scaled so the peak
            // speed (at theta = 0) equals the configured cap.
            let a = params.half_len_x;
            let b = params.half_len_y;
            let theta_dot = params.speed / (a * a + b * b).sqrt();
            let theta = theta_dot * t;
            let (s, c) = theta.sin_cos();
            let (s2, c2) = (2.0 * theta).sin_cos();
            TrajectorySample {
                p: params.center + Vec3::new(a * s, b * s * c, 0.0),
                v: theta_dot * Vec3::new(a * c, b * c2, 0.0),
                a: theta_dot * theta_dot * Vec3::new(-a * s, -2.0 * b * s2, 0.0),
                yaw: params.yaw,
                yaw_rate: 0.0,
            }
        }
        TrajKind::LineScan => {
            // back-and-forth stroke at constant speed with smooth cosine
            // velocity reversals at the ends; the reversal bursts are the
            // high-frequency load the fast estimator channel exists for
            let axis = params.scan_axis.normalize();
            let v = params.speed;
            if v == 0.0 {
                return TrajectorySample {
                    p: params.center,
                    yaw: params.yaw,
                    ..TrajectorySample::default()
                };
            }
            let t_turn = params.scan_turn_s;
            // cruise endpoints leave room for the turnaround excursion
            let x_c = params.scan_half_len - v * t_turn / std::f64::consts::PI;
            let t_cruise = 2.0 * x_c / v;
            let period = 2.0 * (t_cruise + t_turn);
            // phase origin: center crossing, moving +axis
            let tm = (t + 0.5 * t_cruise).rem_euclid(period);
            let (x, vx, ax) = if tm < t_cruise {
                (-x_c + v * tm, v, 0.0)
            } else if tm < t_cruise + t_turn {
                let tau = (tm - t_cruise) / t_turn;
                let phase = std::f64::consts::PI * tau;
                (
                    x_c + v * t_turn / std::f64::consts::PI * phase.sin(),
                    v * phase.cos(),
                    -(std::f64::consts::PI * v / t_turn) * phase.sin(),
                )
            } else if tm < 2.0 * t_cruise + t_turn {
                let tau = tm - t_cruise - t_turn;
                (x_c - v * tau, -v, 0.0)
            } else {
                let tau = (tm - 2.0 * t_cruise - t_turn) / t_turn;
                let phase = std::f64::consts::PI * tau;
                (
                    -x_c - v * t_turn / std::f64::consts::PI * phase.sin(),
                    -v * phase.cos(),
                    (std::f64::consts::PI * v / t_turn) * phase.sin(),
                )
            };
            TrajectorySample {
                p: params.center + x * axis,
                v: vx * axis,
                a: ax * axis,
                yaw: params.yaw,
                yaw_rate: 0.0,
            }
        }
    }
}
