//! Scenario harness: configuration, trajectory generation, the closed-loop
//! runner, metrics, and telemetry output.

pub mod config;
pub mod metrics;
pub mod scenario;
pub mod telemetry;
pub mod trajectory;

pub use config::{Ablation, ScenarioConfig, ScenarioKind};
pub use metrics::{compute_metrics, MetricStats, MetricsReport};
pub use scenario::{run_scenario, run_scenario_to_vec, RunArtifacts};
pub use telemetry::{CsvSink, TelemetryRow, TelemetrySink, VecSink};
pub use trajectory::{gen_trajectory, TrajParams};
