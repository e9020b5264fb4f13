//! End-to-end experiment orchestration: configuration ingestion, drop/slot
//! loops, scheduler comparisons, metric aggregation, and result export.
//!
//! Three drivers cover the experiment families:
//!
//! * [`run_longterm`] — learn thresholds online while measuring cumulative
//!   shares and utility for each requested scheduler.
//! * [`run_gain_sweep`] — paired full-duplex vs. half-duplex comparisons
//!   across a sweep axis (self-interference mitigation level, or user
//!   placement crossed with cancellation capability), on shared randomness.
//! * [`run_shortterm`] — per-window hard-guarantee scheduling with
//!   thresholds frozen from a long-term learning phase, evaluated across a
//!   range of window lengths against an unconstrained reference run.
//!
//! Every run is reproducible from `(config, master_seed)`: drops and fading
//! streams are derived deterministically, and results carry checksums of the
//! realizations they consumed so paired comparisons can be audited.

mod config;
mod report;
mod run;

pub use config::{
    DemandsConfig, OptimizerConfig, RunConfig, SchedulerKind, SicScenario, SimConfig,
};
pub use report::{
    read_summaries, read_trace, ExportFormat, MetricsReport, RunRecord, SummaryRecord,
    SUMMARY_COLUMNS, TRACE_COLUMNS,
};
pub use run::{derive_seeds, run_gain_sweep, run_longterm, run_shortterm, DropSeeds, SweepAxis};

use thiserror::Error;

use crate::channel::ChannelError;
use crate::feasibility::DemandError;

/// Errors surfaced by configuration loading, experiment drivers, and export.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// The configuration is malformed or internally inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// The demands admit no schedule for the requested run.
    #[error("infeasible demands: {0}")]
    Infeasible(String),
    /// Cell/channel setup failed.
    #[error("channel error: {0}")]
    Channel(#[from] ChannelError),
    /// Reading or writing result files failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// The TOML configuration text could not be parsed.
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    /// CSV encoding or decoding failed.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    /// JSON encoding or decoding failed.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<DemandError> for HarnessError {
    fn from(e: DemandError) -> HarnessError {
        match e {
            DemandError::Infeasible(msg) => HarnessError::Infeasible(msg),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl HarnessError {
    /// Process exit code for CLI use: 2 for infeasible demands, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Infeasible(_) => 2,
            _ => 1,
        }
    }
}
