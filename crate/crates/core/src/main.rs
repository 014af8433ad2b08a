//! Command-line runner for the aerial-manipulator simulation toolkit.

use amsim::error::HarnessError;
use amsim::harness::config::{Ablation, GridSpec, ScenarioConfig};
use amsim::harness::telemetry::{parse_telemetry, CsvSink};
use amsim::harness::{compute_metrics, run_scenario};
use clap::{Parser, Subcommand};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "amsim", about = "Aerial manipulator simulation and control scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write telemetry.csv + metrics.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's ablation mode (baseline|ndob_only|full).
        #[arg(long)]
        ablation: Option<String>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default runs/<scenario>_<ablation>_seed<seed>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Cartesian product of a grid file over a base config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Output root (default runs/sweep).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute stabilization metrics (deviation from the first sample)
    /// from a telemetry CSV.
    Metrics { telemetry: PathBuf },
    /// Parse and validate a config file.
    ValidateConfig { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) | HarnessError::InvalidParams(_) => ExitCode::from(2),
                HarnessError::NumericalAbort(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            ablation,
            seed,
            out,
        } => {
            let mut cfg = ScenarioConfig::from_path(&config)?;
            if let Some(ab) = &ablation {
                cfg.scenario.ablation = ab.parse::<Ablation>().map_err(HarnessError::Config)?;
            }
            if let Some(s) = seed {
                cfg.scenario.seed = s;
            }
            let out_dir = out.unwrap_or_else(|| {
                PathBuf::from("runs").join(format!(
                    "{}_{}_seed{}",
                    cfg.scenario.kind.as_str(),
                    cfg.scenario.ablation.as_str(),
                    cfg.scenario.seed
                ))
            });
            let report = run_into_dir(&cfg, &out_dir)?;
            println!("{}", report);
            Ok(())
        }
        Command::Sweep { config, grid, out } => {
            let base = ScenarioConfig::from_path(&config)?;
            let grid = GridSpec::from_path(&grid)?;
            let runs = grid.expand(&base);
            let root = out.unwrap_or_else(|| PathBuf::from("runs/sweep"));
            let mut summaries = Vec::new();
            for (label, cfg) in &runs {
                let dir = root.join(label);
                let line = run_into_dir(cfg, &dir)?;
                println!("{line}");
                summaries.push(serde_json::json!({
                    "label": label,
                    "dir": dir.to_string_lossy(),
                }));
            }
            let summary_path = root.join("sweep_summary.json");
            std::fs::write(
                &summary_path,
                serde_json::to_string_pretty(&summaries).expect("summary serializes"),
            )?;
            println!("{} runs -> {}", runs.len(), root.display());
            Ok(())
        }
        Command::Metrics { telemetry } => {
            let rows = parse_telemetry(BufReader::new(File::open(&telemetry)?))?;
            if rows.is_empty() {
                return Err(HarnessError::EmptySeries);
            }
            let quad0 = rows[0].p;
            let ee0 = rows[0].ee_world;
            let quad_err: Vec<_> = rows.iter().map(|r| r.p - quad0).collect();
            let ee_err: Vec<_> = rows.iter().map(|r| r.ee_world - ee0).collect();
            let quad_m = compute_metrics(&quad_err)?;
            let ee_m = compute_metrics(&ee_err)?;
            let out = serde_json::json!({
                "samples": rows.len(),
                "quad_deviation": quad_m,
                "ee_deviation": ee_m,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            println!(
                "ok: {} scenario, {:.1} s at seed {}, ablation {}",
                cfg.scenario.kind.as_str(),
                cfg.duration(),
                cfg.scenario.seed,
                cfg.scenario.ablation.as_str()
            );
            Ok(())
        }
    }
}

/// Runs one scenario into a directory; returns the printable summary line.
fn run_into_dir(cfg: &ScenarioConfig, dir: &Path) -> Result<String, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let telemetry_path = dir.join("telemetry.csv");
    let file = BufWriter::new(File::create(&telemetry_path)?);
    let mut sink = CsvSink::new(file)?;
    let artifacts = run_scenario(cfg, &mut sink)?;
    sink.into_inner().flush()?;

    let metrics_path = dir.join("metrics.json");
    std::fs::write(&metrics_path, artifacts.report.to_json())?;
    Ok(format!(
        "{} ({:.2} s wall) -> {}",
        artifacts.report.summary_line(),
        artifacts.report.runtime_s,
        dir.display()
    ))
}
