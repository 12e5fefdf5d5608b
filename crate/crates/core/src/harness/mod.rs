//! Experiment configuration, scenario presets and orchestration.
//!
//! One TOML document describes one experiment. [`run`] fans its seeds out
//! over a worker pool; results are ordered by seed regardless of which
//! worker finished first.

mod config;
pub mod presets;
mod run;

pub use config::{AccessPointConfig, ArrivalWindow, ConfigError, ExperimentConfig, Topology};
pub use run::{
    analyze, run, run_seed, run_seed_with_sink, sweep, voip_capacity, write_reports,
    write_sweep_csv, SeedRun, SweepParameter, SweepRow, VoipCapacity, VoipPoint, SWEEP_CSV_HEADER,
};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::medium::MediumError;
use crate::metrics::MetricsError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config serialisation error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
