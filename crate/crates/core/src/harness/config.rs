//! Scenario configuration: a TOML tree with sections for each subsystem.
//! Every key has a default, so an empty file is a valid hover scenario.

use crate::control::{Gains, ThrustProjection};
use crate::delta::DeltaGeometry;
use crate::error::HarnessError;
use crate::harness::trajectory::TrajParams;
use crate::math::{Mat3, Vec3};
use crate::observers::NdobConfig;
use crate::plant::{Imu, QuadParams, WindKind, WindModel};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Quad holds a setpoint while the arm scans with a payload.
    DisturbanceRejection,
    /// Quad and end-effector track a lemniscate under wind; the arm
    /// compensates the quad's tracking error.
    TrajectoryCompensation,
    /// End-effector holds a fixed world point while the quad flies circles.
    EeStabilization,
    /// Everything taken from the config as-is.
    Custom,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::DisturbanceRejection => "disturbance_rejection",
            Self::TrajectoryCompensation => "trajectory_compensation",
            Self::EeStabilization => "ee_stabilization",
            Self::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// Outer PID + flatness only, no disturbance compensation.
    Baseline,
    /// Low-frequency observer only.
    NdobOnly,
    /// Observer plus high-frequency end-effector compensation.
    Full,
}

impl Ablation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::NdobOnly => "ndob_only",
            Self::Full => "full",
        }
    }

    pub fn use_ndob(&self) -> bool {
        !matches!(self, Self::Baseline)
    }

    pub fn use_high_freq(&self) -> bool {
        matches!(self, Self::Full)
    }
}

impl FromStr for Ablation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Self::Baseline),
            "ndob_only" => Ok(Self::NdobOnly),
            "full" => Ok(Self::Full),
            other => Err(format!(
                "unknown ablation '{other}' (expected baseline|ndob_only|full)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassMode {
    Total,
    Base,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    /// Run length, s; default depends on the scenario kind.
    pub duration_s: Option<f64>,
    pub seed: u64,
    pub ablation: Ablation,
    /// Initial transient excluded from the metrics, s.
    pub metrics_skip_s: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Custom,
            duration_s: None,
            seed: 1,
            ablation: Ablation::Full,
            metrics_skip_s: 5.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSection {
    pub m_b: f64,
    pub m_m: f64,
    pub m_payload: f64,
    pub inertia: [f64; 3],
    pub d_z: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub rate_limit: f64,
}

impl Default for QuadSection {
    fn default() -> Self {
        Self {
            m_b: 1.2788,
            m_m: 0.1034,
            m_payload: 0.0,
            inertia: [0.012, 0.012, 0.02],
            d_z: 0.0,
            t_min: 1.0,
            t_max: 25.0,
            rate_limit: 6.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServoSection {
    pub tau_s: f64,
    pub rate_limit: f64,
}

impl Default for ServoSection {
    fn default() -> Self {
        Self {
            tau_s: 0.02,
            rate_limit: 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuSection {
    pub accel_noise_std: f64,
}

impl Default for ImuSection {
    fn default() -> Self {
        Self {
            accel_noise_std: 0.05,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmSection {
    pub l_upper: f64,
    pub l_lower: f64,
    pub r_base: f64,
    pub r_eff: f64,
    pub mount_xyz: [f64; 3],
    pub joint_limits: [f64; 2],
    /// Arm-frame rest/hold position of the end-effector.
    pub home_xyz: [f64; 3],
    /// Horizontal radius the compensation target is clamped to, m.
    pub workspace_radius: f64,
    /// Arm-frame z range the compensation target is clamped to, m.
    pub workspace_z: [f64; 2],
    pub v_singularity_tol: f64,
    pub cond_max: f64,
}

impl Default for ArmSection {
    fn default() -> Self {
        Self {
            l_upper: 0.09,
            l_lower: 0.18,
            r_base: 0.06,
            r_eff: 0.025,
            mount_xyz: [0.0, 0.0, -0.05],
            joint_limits: [-0.5, 1.9],
            home_xyz: [0.0, 0.0, -0.15],
            workspace_radius: 0.065,
            workspace_z: [-0.17, -0.135],
            v_singularity_tol: 1e-6,
            cond_max: 1e6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObserversSection {
    /// Observer gain c; default 10 * mass (0.1 s time constant).
    pub ndob_c: Option<f64>,
    pub ndob_mass_mode: MassMode,
    pub butter_cutoff_hz: f64,
    /// High-pass cutoff; default c / (2 pi m), matching the observer
    /// bandwidth so the two channels partition the spectrum.
    pub hp_cutoff_hz: Option<f64>,
    pub sensor_rate_hz: f64,
    pub control_rate_hz: f64,
}

impl Default for ObserversSection {
    fn default() -> Self {
        Self {
            ndob_c: None,
            ndob_mass_mode: MassMode::Total,
            butter_cutoff_hz: 50.0,
            hp_cutoff_hz: None,
            sensor_rate_hz: 1000.0,
            control_rate_hz: 100.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub kpp: [f64; 3],
    pub kvp: [f64; 3],
    pub kvi: [f64; 3],
    pub kvd: [f64; 3],
    pub kp_arm: [f64; 3],
    pub kd_arm: [f64; 3],
    pub k_att: f64,
    pub k_rate: f64,
    /// Velocity-integral clamp, per axis.
    pub integral_limit: [f64; 3],
    /// Derivative-term low-pass cutoff, Hz.
    pub deriv_lp_hz: f64,
    pub thrust_projection: ThrustProjection,
    /// Feed the high-frequency torque forward into the rate command.
    pub rate_ff: bool,
}

impl Default for ControlSection {
    fn default() -> Self {
        Self {
            kpp: [3.0; 3],
            kvp: [8.0; 3],
            kvi: [2.0; 3],
            kvd: [0.4; 3],
            kp_arm: [8.0; 3],
            kd_arm: [0.5; 3],
            k_att: 35.0,
            k_rate: 1.8,
            integral_limit: [2.0; 3],
            deriv_lp_hz: 20.0,
            thrust_projection: ThrustProjection::Current,
            rate_ff: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindSection {
    pub kind: WindKind,
    pub f_const: [f64; 3],
    pub amplitude: [f64; 3],
    pub freq_hz: f64,
    pub t_step: f64,
}

impl Default for WindSection {
    fn default() -> Self {
        Self {
            kind: WindKind::Constant,
            f_const: [0.0; 3],
            amplitude: [0.0; 3],
            freq_hz: 0.0,
            t_step: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    /// Quad trajectory center; scenario defaults apply when omitted.
    pub center: [f64; 3],
    /// Circle diameter (ee_stabilization), m.
    pub circle_diameter: Option<f64>,
    /// Circle speed, m/s.
    pub circle_speed: Option<f64>,
    /// Lemniscate half-lengths (trajectory_compensation), m.
    pub half_len_x: Option<f64>,
    pub half_len_y: Option<f64>,
    /// Lemniscate peak-speed cap, m/s.
    pub speed_cap: Option<f64>,
    /// Arm scan direction in the arm frame (disturbance_rejection).
    pub scan_axis: [f64; 3],
    /// Arm scan half-length, m.
    pub scan_half_len: f64,
    /// Arm scan cruise speed, m/s.
    pub scan_speed: f64,
    /// Arm scan turnaround duration, s.
    pub scan_turn_s: f64,
    /// World point the end-effector holds (ee_stabilization); derived from
    /// the initial pose when omitted.
    pub hold_point: Option<[f64; 3]>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            center: [0.0; 3],
            circle_diameter: None,
            circle_speed: None,
            half_len_x: None,
            half_len_y: None,
            speed_cap: None,
            scan_axis: [1.0, 0.0, 0.0],
            scan_half_len: 0.04,
            scan_speed: 0.1,
            scan_turn_s: 0.15,
            hold_point: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub quad: QuadSection,
    pub servo: ServoSection,
    pub imu: ImuSection,
    pub arm: ArmSection,
    pub observers: ObserversSection,
    pub control: ControlSection,
    pub wind: WindSection,
    pub trajectory: TrajectorySection,
}

fn vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            toml::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            HarnessError::Config(format!("{}: {e}", path.as_ref().display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg_err = |msg: String| Err(HarnessError::Config(msg));
        if self.duration() <= 0.0 {
            return cfg_err("scenario.duration_s must be positive".into());
        }
        if self.scenario.metrics_skip_s < 0.0 || self.scenario.metrics_skip_s >= self.duration() {
            return cfg_err("scenario.metrics_skip_s must lie inside the run".into());
        }
        if self.quad.m_b <= 0.0 || self.quad.m_m <= 0.0 {
            return cfg_err("quad masses must be positive".into());
        }
        if self.quad.m_payload < 0.0 {
            return cfg_err("quad.m_payload must be nonnegative".into());
        }
        if self.quad.inertia.iter().any(|j| *j <= 0.0) {
            return cfg_err("quad.inertia must be positive".into());
        }
        if self.quad.t_min >= self.quad.t_max {
            return cfg_err("quad thrust limits are inverted".into());
        }
        self.geometry()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let obs = &self.observers;
        if obs.sensor_rate_hz <= 0.0 || obs.control_rate_hz <= 0.0 {
            return cfg_err("observer rates must be positive".into());
        }
        let ratio = obs.sensor_rate_hz / obs.control_rate_hz;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return cfg_err(format!(
                "sensor_rate_hz ({}) must be an integer multiple of control_rate_hz ({})",
                obs.sensor_rate_hz, obs.control_rate_hz
            ));
        }
        if obs.butter_cutoff_hz <= 0.0 || obs.butter_cutoff_hz >= 0.5 * obs.sensor_rate_hz {
            return cfg_err("observers.butter_cutoff_hz must lie below Nyquist".into());
        }
        if let Some(hp) = obs.hp_cutoff_hz {
            if hp <= 0.0 || hp >= 0.5 * obs.control_rate_hz {
                return cfg_err("observers.hp_cutoff_hz must lie below the control Nyquist".into());
            }
        }
        if let Some(c) = obs.ndob_c {
            if c <= 0.0 {
                return cfg_err("observers.ndob_c must be positive".into());
            }
        }
        if self.servo.tau_s <= 0.0 || self.servo.rate_limit <= 0.0 {
            return cfg_err("servo parameters must be positive".into());
        }
        if self.imu.accel_noise_std < 0.0 {
            return cfg_err("imu.accel_noise_std must be nonnegative".into());
        }
        self.quad_trajectory()?.validate()?;
        self.arm_scan().validate()?;
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.scenario.duration_s.unwrap_or(match self.scenario.kind {
            ScenarioKind::DisturbanceRejection => 20.0,
            ScenarioKind::TrajectoryCompensation => 30.0,
            ScenarioKind::EeStabilization => 30.0,
            ScenarioKind::Custom => 10.0,
        })
    }

    pub fn geometry(&self) -> DeltaGeometry {
        DeltaGeometry {
            l_upper: self.arm.l_upper,
            l_lower: self.arm.l_lower,
            r_base: self.arm.r_base,
            r_eff: self.arm.r_eff,
            p_mount: vec3(&self.arm.mount_xyz),
            r_mount: Mat3::identity(),
            q_min: self.arm.joint_limits[0],
            q_max: self.arm.joint_limits[1],
            v_tol: self.arm.v_singularity_tol,
            cond_max: self.arm.cond_max,
        }
    }

    pub fn quad_params(&self) -> QuadParams {
        QuadParams {
            m_b: self.quad.m_b,
            m_m: self.quad.m_m,
            m_payload: self.quad.m_payload,
            j: vec3(&self.quad.inertia),
            d_z: self.quad.d_z,
            t_min: self.quad.t_min,
            t_max: self.quad.t_max,
            rate_limit: self.quad.rate_limit,
            k_rate: self.control.k_rate,
            servo_tau: self.servo.tau_s,
            servo_rate_limit: self.servo.rate_limit,
        }
    }

    pub fn gains(&self) -> Gains {
        Gains {
            kpp: vec3(&self.control.kpp),
            kvp: vec3(&self.control.kvp),
            kvi: vec3(&self.control.kvi),
            kvd: vec3(&self.control.kvd),
            kp_arm: vec3(&self.control.kp_arm),
            kd_arm: vec3(&self.control.kd_arm),
            k_att: self.control.k_att,
            k_rate: self.control.k_rate,
            d_z: self.quad.d_z,
        }
    }

    pub fn wind_model(&self) -> WindModel {
        WindModel {
            kind: self.wind.kind,
            f_const: vec3(&self.wind.f_const),
            amplitude: vec3(&self.wind.amplitude),
            freq_hz: self.wind.freq_hz,
            t_step: self.wind.t_step,
        }
    }

    pub fn imu(&self) -> Imu {
        Imu {
            accel_noise_std: self.imu.accel_noise_std,
        }
    }

    /// Mass the observer and the compensation divide by.
    pub fn compensation_mass(&self) -> f64 {
        match self.observers.ndob_mass_mode {
            MassMode::Total => self.quad.m_b + self.quad.m_m,
            MassMode::Base => self.quad.m_b,
        }
    }

    pub fn ndob_config(&self) -> NdobConfig {
        let mass = self.compensation_mass();
        NdobConfig {
            c: self.observers.ndob_c.unwrap_or(10.0 * mass),
            mass,
            butter_cutoff_hz: self.observers.butter_cutoff_hz,
            sensor_rate_hz: self.observers.sensor_rate_hz,
        }
    }

    /// High-pass cutoff of the fast channel, Hz.
    pub fn hp_cutoff_hz(&self) -> f64 {
        self.observers.hp_cutoff_hz.unwrap_or_else(|| {
            let cfg = self.ndob_config();
            cfg.c / (2.0 * std::f64::consts::PI * cfg.mass)
        })
    }

    /// Quad reference trajectory with scenario defaults applied.
    pub fn quad_trajectory(&self) -> Result<TrajParams, HarnessError> {
        let t = &self.trajectory;
        let center = vec3(&t.center);
        Ok(match self.scenario.kind {
            ScenarioKind::DisturbanceRejection | ScenarioKind::Custom => {
                TrajParams::setpoint(center)
            }
            ScenarioKind::TrajectoryCompensation => TrajParams::lemniscate(
                center,
                t.half_len_x.unwrap_or(0.6),
                t.half_len_y.unwrap_or(0.3),
                t.speed_cap.unwrap_or(1.5),
            ),
            ScenarioKind::EeStabilization => TrajParams::circle(
                center,
                t.circle_diameter.unwrap_or(0.12),
                t.circle_speed.unwrap_or(0.05),
            ),
        })
    }

    /// Arm-frame scan trajectory for the disturbance-rejection scenario.
    pub fn arm_scan(&self) -> TrajParams {
        let t = &self.trajectory;
        TrajParams::line_scan(
            vec3(&self.arm.home_xyz),
            vec3(&t.scan_axis),
            t.scan_half_len,
            t.scan_speed,
            t.scan_turn_s,
        )
    }

    pub fn arm_home(&self) -> Vec3 {
        vec3(&self.arm.home_xyz)
    }

    pub fn to_toml_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("config serializes")
    }
}

/// Sweep grid: the Cartesian product of the present axes, each applied on
/// top of a base configuration.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub seeds: Option<Vec<u64>>,
    pub ablations: Option<Vec<Ablation>>,
    pub scan_speeds: Option<Vec<f64>>,
    pub payloads: Option<Vec<f64>>,
    pub circle_diameters: Option<Vec<f64>>,
    pub circle_speeds: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            HarnessError::Config(format!("{}: {e}", path.as_ref().display()))
        })?;
        toml::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Expands the grid over the base config; labels encode the axes.
    pub fn expand(&self, base: &ScenarioConfig) -> Vec<(String, ScenarioConfig)> {
        let seeds = self.seeds.clone().unwrap_or_else(|| vec![base.scenario.seed]);
        let ablations = self
            .ablations
            .clone()
            .unwrap_or_else(|| vec![base.scenario.ablation]);
        let scan_speeds = self
            .scan_speeds
            .clone()
            .unwrap_or_else(|| vec![base.trajectory.scan_speed]);
        let payloads = self
            .payloads
            .clone()
            .unwrap_or_else(|| vec![base.quad.m_payload]);
        let diameters = self
            .circle_diameters
            .clone()
            .unwrap_or_else(|| vec![base.trajectory.circle_diameter.unwrap_or(0.12)]);
        let speeds = self
            .circle_speeds
            .clone()
            .unwrap_or_else(|| vec![base.trajectory.circle_speed.unwrap_or(0.05)]);

        let mut runs = Vec::new();
        for ab in &ablations {
            for payload in &payloads {
                for scan in &scan_speeds {
                    for dia in &diameters {
                        for speed in &speeds {
                            for seed in &seeds {
                                let mut cfg = base.clone();
                                cfg.scenario.ablation = *ab;
                                cfg.scenario.seed = *seed;
                                cfg.quad.m_payload = *payload;
                                cfg.trajectory.scan_speed = *scan;
                                cfg.trajectory.circle_diameter = Some(*dia);
                                cfg.trajectory.circle_speed = Some(*speed);
                                let mut label = format!("{}", ab.as_str());
                                if self.payloads.is_some() {
                                    label.push_str(&format!("_m{:03}g", (payload * 1000.0) as u64));
                                }
                                if self.scan_speeds.is_some() {
                                    label.push_str(&format!(
                                        "_v{:03}mms",
                                        (scan * 1000.0) as u64
                                    ));
                                }
                                if self.circle_diameters.is_some() {
                                    label.push_str(&format!(
                                        "_d{:03}mm",
                                        (dia * 1000.0) as u64
                                    ));
                                }
                                if self.circle_speeds.is_some() {
                                    label.push_str(&format!(
                                        "_s{:03}mms",
                                        (speed * 1000.0) as u64
                                    ));
                                }
                                label.push_str(&format!("_seed{seed}"));
                                runs.push((label, cfg));
                            }
                        }
                    }
                }
            }
        }
        runs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid_hover() {
        let cfg = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.scenario.kind, ScenarioKind::Custom);
        assert_eq!(cfg.scenario.seed, 1);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn section_defaults_match_contract() {
        let cfg = ScenarioConfig::default();
        let ndob = cfg.ndob_config();
        // c/m = 10 per second by default
        assert!((ndob.c / ndob.mass - 10.0).abs() < 1e-12);
        // high-pass cutoff matches the observer bandwidth
        assert!((cfg.hp_cutoff_hz() - 10.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-9);
        assert_eq!(cfg.compensation_mass(), 1.2788 + 0.1034);
    }

    #[test]
    fn parses_scenario_file() {
        let text = r#"
[scenario]
kind = "ee_stabilization"
duration_s = 12.0
seed = 7
ablation = "ndob_only"

[quad]
m_payload = 0.2

[trajectory]
circle_diameter = 0.08
circle_speed = 0.01

[wind]
kind = "gust_mix"
f_const = [0.0, 0.4, 0.0]
amplitude = [0.0, 0.2, 0.0]
freq_hz = 0.3
"#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.scenario.kind, ScenarioKind::EeStabilization);
        assert_eq!(cfg.scenario.ablation, Ablation::NdobOnly);
        let quad_traj = cfg.quad_trajectory().unwrap();
        assert!((quad_traj.diameter - 0.08).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ScenarioConfig::from_toml_str("[scenario]\nbogus = 1").is_err());
        assert!(ScenarioConfig::from_toml_str("[quad]\nm_b = -1.0").is_err());
        assert!(
            ScenarioConfig::from_toml_str("[observers]\nbutter_cutoff_hz = 800.0").is_err()
        );
        assert!(ScenarioConfig::from_toml_str("[scenario]\nduration_s = 0.0").is_err());
        assert!(ScenarioConfig::from_toml_str("[observers]\nsensor_rate_hz = 950.0").is_err());
    }

    #[test]
    fn grid_expansion_covers_product() {
        let base = ScenarioConfig::default();
        let grid: GridSpec = toml::from_str(
            r#"
seeds = [1, 2]
ablations = ["baseline", "full"]
payloads = [0.2, 0.4]
"#,
        )
        .unwrap();
        let runs = grid.expand(&base);
        assert_eq!(runs.len(), 8);
        assert!(runs.iter().any(|(label, cfg)| {
            label.contains("baseline") && (cfg.quad.m_payload - 0.4).abs() < 1e-12
        }));
    }

    #[test]
    fn config_echo_round_trips() {
        let cfg = ScenarioConfig::default();
        let val = cfg.to_toml_value();
        let text = toml::to_string(&val).unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.quad.m_b, cfg.quad.m_b);
    }
}
