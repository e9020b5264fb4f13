//! Experiment configuration, loaded from a single structured TOML file.
//!
//! Every physical-layer value has a default matching the reference system
//! setup, so a minimal config only needs the demand vectors. All defaults
//! can be overridden per run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{CellConfig, ChannelParams};
use crate::feasibility::TemporalDemands;
use crate::rate::SicCapability;

use super::HarnessError;

/// Which users can cancel the inter-user interference they receive.
///
/// Cancellation capability widens the mode choice for pairs whose downlink
/// user can decode-and-subtract the uplink signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SicScenario {
    /// No user cancels interference; pairs run interference-limited.
    NoSic,
    /// Every user can cancel interference when the uplink rate allows it.
    AllSic,
    /// The first `round(fraction · n)` users can cancel.
    Fraction { fraction: f64 },
    /// Explicit per-user capability flags.
    Flags { flags: Vec<bool> },
}

impl Default for SicScenario {
    fn default() -> Self {
        SicScenario::NoSic
    }
}

impl SicScenario {
    /// Materializes per-user capability flags for `n` users.
    pub fn capability(&self, n: usize) -> SicCapability {
        match self {
            SicScenario::NoSic => SicCapability::none(n),
            SicScenario::AllSic => SicCapability::all(n),
            SicScenario::Fraction { fraction } => {
                let k = ((fraction * n as f64).round().max(0.0) as usize).min(n);
                SicCapability::from_flags((0..n).map(|i| i < k).collect())
            }
            SicScenario::Flags { flags } => SicCapability::from_flags(flags.clone()),
        }
    }

    fn validate(&self, n: usize) -> Result<(), HarnessError> {
        match self {
            SicScenario::Fraction { fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(HarnessError::Config(format!(
                        "sic fraction {fraction} must lie in [0, 1]"
                    )));
                }
            }
            SicScenario::Flags { flags } => {
                if flags.len() != n {
                    return Err(HarnessError::Config(format!(
                        "sic flags cover {} users but the cell has {n}",
                        flags.len()
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Scheduling strategies the experiment drivers know how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    /// Threshold-based selection over all modes, thresholds learned online.
    Tbs,
    /// Baseline restricted to one-direction (half-duplex) candidates, with
    /// its own thresholds learned online over that restricted set.
    Hd,
    /// Window-constrained selection with frozen thresholds; runs under the
    /// short-term driver, which takes the window lengths separately.
    Atbs,
}

impl SchedulerKind {
    /// Stable label used in result records.
    pub fn label(&self) -> &'static str {
        match self {
            SchedulerKind::Tbs => "tbs",
            SchedulerKind::Hd => "hd",
            SchedulerKind::Atbs => "atbs",
        }
    }
}

/// Temporal demand bounds as written in a config file.
///
/// Uppers may be omitted, in which case they default to 1 (no upper bound).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandsConfig {
    /// Lower uplink share bound per user.
    pub lower_ul: Vec<f64>,
    /// Lower downlink share bound per user.
    pub lower_dl: Vec<f64>,
    /// Optional upper uplink share bound per user (default: all 1).
    #[serde(default)]
    pub upper_ul: Option<Vec<f64>>,
    /// Optional upper downlink share bound per user (default: all 1).
    #[serde(default)]
    pub upper_dl: Option<Vec<f64>>,
}

impl DemandsConfig {
    /// Lower bounds only; uppers left unconstrained.
    pub fn from_lower(lower_ul: Vec<f64>, lower_dl: Vec<f64>) -> DemandsConfig {
        DemandsConfig { lower_ul, lower_dl, upper_ul: None, upper_dl: None }
    }

    /// Uniform symmetric lower bound `w` for `n` users, no uppers.
    pub fn uniform_lower(n: usize, w: f64) -> DemandsConfig {
        DemandsConfig::from_lower(vec![w; n], vec![w; n])
    }

    /// Converts to validated demand vectors.
    pub fn to_demands(&self) -> Result<TemporalDemands, HarnessError> {
        let n = self.lower_ul.len();
        let fill = |o: &Option<Vec<f64>>| o.clone().unwrap_or_else(|| vec![1.0; n]);
        let d = TemporalDemands {
            lower_ul: self.lower_ul.clone(),
            lower_dl: self.lower_dl.clone(),
            upper_ul: fill(&self.upper_ul),
            upper_dl: fill(&self.upper_dl),
        };
        d.validate()?;
        Ok(d)
    }
}

/// Slot/drop counts and the scheduler roster for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Slots per drop in learning and reference runs.
    pub n_slots: u64,
    /// Independent cell drops to average over.
    pub n_drops: u64,
    /// Cancellation capability of the users.
    pub scenario: SicScenario,
    /// Which schedulers the long-term driver runs.
    pub schedulers: Vec<SchedulerKind>,
    /// Window lengths for the short-term driver.
    pub windows: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_slots: 100_000,
            n_drops: 20,
            scenario: SicScenario::NoSic,
            schedulers: vec![SchedulerKind::Tbs, SchedulerKind::Hd],
            windows: vec![8, 80, 800, 8000],
        }
    }
}

/// Step size and trace cadence for online threshold learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Stochastic-approximation step size.
    pub step_size: f64,
    /// Slots between intermediate trace rows of a learning run.
    pub checkpoint_interval: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { step_size: 0.001, checkpoint_interval: 10_000 }
    }
}

fn default_master_seed() -> u64 {
    7
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Root seed; every drop and fading stream derives from it.
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Cell geometry and user placement.
    #[serde(default)]
    pub cell: CellConfig,
    /// Physical-layer parameters.
    #[serde(default)]
    pub channel: ChannelParams,
    /// Temporal demand bounds.
    pub demands: DemandsConfig,
    /// Run sizing and scheduler roster.
    #[serde(default)]
    pub run: RunConfig,
    /// Threshold-learning parameters.
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl SimConfig {
    /// Default experiment around the given demands; the cell size follows
    /// the demand vector length.
    pub fn with_demands(demands: DemandsConfig) -> SimConfig {
        let mut cell = CellConfig::default();
        cell.n_users = demands.lower_ul.len();
        SimConfig {
            master_seed: default_master_seed(),
            cell,
            channel: ChannelParams::default(),
            demands,
            run: RunConfig::default(),
            optimizer: OptimizerConfig::default(),
        }
    }

    /// Parses and validates a TOML configuration.
    pub fn from_toml_str(text: &str) -> Result<SimConfig, HarnessError> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses, and validates a TOML configuration file.
    pub fn from_path(path: &Path) -> Result<SimConfig, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        SimConfig::from_toml_str(&text)
    }

    /// Number of users in the cell.
    pub fn n_users(&self) -> usize {
        self.cell.n_users
    }

    /// Validated demand vectors.
    pub fn demands(&self) -> Result<TemporalDemands, HarnessError> {
        self.demands.to_demands()
    }

    /// Checks structural consistency (sizes, ranges, rosters).
    pub fn validate(&self) -> Result<(), HarnessError> {
        let n = self.cell.n_users;
        if n == 0 {
            return Err(HarnessError::Config("the cell must hold at least one user".into()));
        }
        let d = self.demands.to_demands()?;
        if d.n_users() != n {
            return Err(HarnessError::Config(format!(
                "demands cover {} users but the cell has {n}",
                d.n_users()
            )));
        }
        if self.run.n_slots == 0 {
            return Err(HarnessError::Config("n_slots must be at least 1".into()));
        }
        if self.run.n_drops == 0 {
            return Err(HarnessError::Config("n_drops must be at least 1".into()));
        }
        if self.run.schedulers.is_empty() {
            return Err(HarnessError::Config("at least one scheduler must be listed".into()));
        }
        if self.run.windows.iter().any(|&s| s == 0) {
            return Err(HarnessError::Config("window lengths must be at least 1".into()));
        }
        self.run.scenario.validate(n)?;
        if !(self.optimizer.step_size.is_finite() && self.optimizer.step_size >= 0.0) {
            return Err(HarnessError::Config(format!(
                "step size {} must be finite and nonnegative",
                self.optimizer.step_size
            )));
        }
        if self.optimizer.checkpoint_interval == 0 {
            return Err(HarnessError::Config("checkpoint_interval must be at least 1".into()));
        }
        if !(self.channel.bandwidth_hz > 0.0) {
            return Err(HarnessError::Config(format!(
                "bandwidth {} Hz must be positive",
                self.channel.bandwidth_hz
            )));
        }
        Ok(())
    }

    /// Configuration echo stored alongside exported results.
    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }
}
