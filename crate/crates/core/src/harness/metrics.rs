//! Tracking-error metrics: RMSE of the error norm, maximum deviation, and
//! the standard deviation of the norm about its mean, with per-axis
//! breakdowns.

use crate::error::HarnessError;
use crate::math::Vec3;
use serde::Serialize;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PerAxis {
    pub rmse_m: [f64; 3],
    pub max_error_m: [f64; 3],
    pub std_m: [f64; 3],
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MetricStats {
    pub rmse_m: f64,
    pub max_error_m: f64,
    pub std_m: f64,
    pub per_axis: PerAxis,
    pub samples: usize,
}

/// Metrics over a series of error vectors.
///
/// `rmse = sqrt(mean ||e||^2)`, `max = max ||e||`, `std` is the population
/// standard deviation of `||e||` about its mean (zero iff the magnitude is
/// constant).
pub fn compute_metrics(errors: &[Vec3]) -> Result<MetricStats, HarnessError> {
    if errors.is_empty() {
        return Err(HarnessError::EmptySeries);
    }
    let n = errors.len() as f64;
    let mut sum_sq = 0.0;
    let mut sum_norm = 0.0;
    let mut max_norm = 0.0_f64;
    let mut axis_sum_sq = [0.0; 3];
    let mut axis_sum = [0.0; 3];
    let mut axis_max = [0.0_f64; 3];
    for e in errors {
        let norm = e.norm();
        sum_sq += norm * norm;
        sum_norm += norm;
        max_norm = max_norm.max(norm);
        for i in 0..3 {
            axis_sum_sq[i] += e[i] * e[i];
            axis_sum[i] += e[i];
            axis_max[i] = axis_max[i].max(e[i].abs());
        }
    }
    let mean_norm = sum_norm / n;
    let var = (sum_sq / n - mean_norm * mean_norm).max(0.0);
    let mut per_axis = PerAxis {
        rmse_m: [0.0; 3],
        max_error_m: axis_max,
        std_m: [0.0; 3],
    };
    for i in 0..3 {
        per_axis.rmse_m[i] = (axis_sum_sq[i] / n).sqrt();
        let mean = axis_sum[i] / n;
        per_axis.std_m[i] = (axis_sum_sq[i] / n - mean * mean).max(0.0).sqrt();
    }
    Ok(MetricStats {
        rmse_m: (sum_sq / n).sqrt(),
        max_error_m: max_norm,
        std_m: var.sqrt(),
        per_axis,
        samples: errors.len(),
    })
}

/// Full per-run report. The primary stats describe the scenario's headline
/// objective (quad stabilization for disturbance rejection, end-effector
/// tracking otherwise); `secondary` carries the other body where relevant.
#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub ablation: String,
    #[serde(flatten)]
    pub primary: MetricStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secondary: Option<SecondaryStats>,
    pub seed: u64,
    pub duration_s: f64,
    /// Wall-clock runtime; printed, never serialized, so reports stay
    /// bit-identical across reruns.
    #[serde(skip_serializing)]
    pub runtime_s: f64,
    /// Echo of the resolved configuration.
    pub config: toml::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondaryStats {
    pub label: String,
    #[serde(flatten)]
    pub stats: MetricStats,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One-line summary in the style of the comparison tables.
    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "{} [{}] seed {}: RMSE {:.4} m, Max {:.4} m, Std {:.4} m",
            self.scenario,
            self.ablation,
            self.seed,
            self.primary.rmse_m,
            self.primary.max_error_m,
            self.primary.std_m
        );
        if let Some(sec) = &self.secondary {
            line.push_str(&format!(
                " | {}: RMSE {:.4} m, Max {:.4} m",
                sec.label, sec.stats.rmse_m, sec.stats.max_error_m
            ));
        }
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(
            compute_metrics(&[]),
            Err(HarnessError::EmptySeries)
        ));
    }

    #[test]
    fn constant_magnitude_has_zero_std() {
        let errors = vec![Vec3::new(0.02, 0.0, 0.0); 50];
        let m = compute_metrics(&errors).unwrap();
        assert_relative_eq!(m.rmse_m, 0.02, epsilon = 1e-15);
        assert_relative_eq!(m.max_error_m, 0.02, epsilon = 1e-15);
        assert!(m.std_m < 1e-12);
    }

    #[test]
    fn two_point_arithmetic() {
        let errors = vec![Vec3::new(0.03, 0.0, 0.0), Vec3::new(0.0, 0.04, 0.0)];
        let m = compute_metrics(&errors).unwrap();
        assert_relative_eq!(m.rmse_m, ((0.0009 + 0.0016) / 2.0_f64).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(m.rmse_m, 0.035355, epsilon = 1e-5);
        assert_relative_eq!(m.max_error_m, 0.04, epsilon = 1e-15);
        assert!(m.rmse_m <= m.max_error_m);
        assert_relative_eq!(m.per_axis.rmse_m[0], (0.0009_f64 / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn rmse_never_exceeds_max() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let errors: Vec<Vec3> = (0..100)
                .map(|_| Vec3::from_fn(|_, _| rng.gen_range(-0.1..0.1)))
                .collect();
            let m = compute_metrics(&errors).unwrap();
            assert!(m.rmse_m <= m.max_error_m + 1e-15);
            assert!(m.std_m >= 0.0);
        }
    }
}
