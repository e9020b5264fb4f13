//! Result records and export to CSV / JSON-lines.
//!
//! A [`MetricsReport`] holds one row per (cell, drop, scheduler, checkpoint)
//! plus per-(cell, scheduler, window) aggregates. Export writes a trace file
//! and a summary file in either format, together with a TOML echo of the
//! configuration that produced them; both formats carry numerically
//! identical values. Column order is stable and documented in the README.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Export file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Comma-separated values with a header row; vectors are `;`-joined.
    Csv,
    /// One JSON object per line; vectors are JSON arrays.
    Jsonl,
}

impl ExportFormat {
    /// File extension for this format.
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Jsonl => "jsonl",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<ExportFormat, HarnessError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "jsonl" | "json-lines" | "ndjson" => Ok(ExportFormat::Jsonl),
            other => Err(HarnessError::Config(format!(
                "unknown format `{other}` (expected `csv` or `jsonl`)"
            ))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Trace-file column order.
pub const TRACE_COLUMNS: [&str; 15] = [
    "cell",
    "drop_index",
    "scheduler",
    "window",
    "t",
    "is_final",
    "mean_utility_bps_hz",
    "mean_utility_mbps",
    "share_ul",
    "share_dl",
    "threshold_ul",
    "threshold_dl",
    "n_windows",
    "window_violations",
    "stream_checksum",
];

/// Summary-file column order.
pub const SUMMARY_COLUMNS: [&str; 11] = [
    "cell",
    "scheduler",
    "window",
    "n_drops",
    "n_windows",
    "window_violations",
    "mean_utility_bps_hz",
    "std_err_bps_hz",
    "mean_utility_mbps",
    "gain_percent_vs_hd",
    "min_share_margin",
];

/// One measured run segment: a scheduler on one drop at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Sweep-cell label (`base` outside sweeps).
    pub cell: String,
    /// Index of the cell drop within the experiment.
    pub drop_index: u64,
    /// `tbs`, `hd`, `atbs`, or `tbs_learn` (the learning phase trace).
    pub scheduler: String,
    /// Window length for hard-guarantee runs; 0 for long-term runs.
    pub window: u64,
    /// Slots consumed when the row was taken.
    pub t: u64,
    /// False for intermediate checkpoints of a learning run.
    pub is_final: bool,
    /// Cumulative mean utility in bps/Hz.
    pub mean_utility_bps_hz: f64,
    /// The same utility scaled by the bandwidth, in Mbps.
    pub mean_utility_mbps: f64,
    /// Cumulative uplink share per user.
    pub share_ul: Vec<f64>,
    /// Cumulative downlink share per user.
    pub share_dl: Vec<f64>,
    /// Uplink thresholds at the checkpoint (frozen values for eval runs).
    pub threshold_ul: Vec<f64>,
    /// Downlink thresholds at the checkpoint.
    pub threshold_dl: Vec<f64>,
    /// Complete windows scheduled (hard-guarantee runs only; else 0).
    pub n_windows: u64,
    /// Windows that missed a lower demand count (must stay 0).
    pub window_violations: u64,
    /// Order-sensitive digest of the channel realizations consumed so far.
    pub stream_checksum: u64,
}

/// Aggregate over drops for one (cell, scheduler, window) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    /// Sweep-cell label.
    pub cell: String,
    /// Scheduler label.
    pub scheduler: String,
    /// Window length (0 for long-term runs).
    pub window: u64,
    /// Drops aggregated.
    pub n_drops: u64,
    /// Total complete windows across drops (hard-guarantee runs).
    pub n_windows: u64,
    /// Total windows that missed a lower demand count.
    pub window_violations: u64,
    /// Mean over drops of the final cumulative utility, bps/Hz.
    pub mean_utility_bps_hz: f64,
    /// Standard error of that mean over drops (0 for a single drop).
    pub std_err_bps_hz: f64,
    /// Mean utility scaled by the bandwidth, Mbps.
    pub mean_utility_mbps: f64,
    /// `100·(mean − mean_hd)/mean_hd` against the half-duplex baseline of
    /// the same cell (ratio of drop means); absent when no baseline ran.
    pub gain_percent_vs_hd: Option<f64>,
    /// Minimum over drops, users, and directions of (share − lower demand).
    pub min_share_margin: f64,
}

/// Full result set of one experiment-driver invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Experiment family: `longterm`, `sweep_sim`, `sweep_placement`, or
    /// `shortterm`.
    pub label: String,
    /// Root seed the whole experiment derives from.
    pub master_seed: u64,
    /// Bandwidth used for the bps/Hz → Mbps conversion.
    pub bandwidth_hz: f64,
    /// TOML echo of the configuration, for reproducibility.
    pub config_echo: String,
    /// Per-(cell, drop, scheduler, checkpoint) rows.
    pub records: Vec<RunRecord>,
    /// Per-(cell, scheduler, window) aggregates.
    pub summaries: Vec<SummaryRecord>,
}

impl MetricsReport {
    /// Final rows only (one per cell/drop/scheduler/window run).
    pub fn finals(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.is_final)
    }

    /// Looks up the aggregate for one (cell, scheduler, window) group.
    pub fn summary(&self, cell: &str, scheduler: &str, window: u64) -> Option<&SummaryRecord> {
        self.summaries
            .iter()
            .find(|s| s.cell == cell && s.scheduler == scheduler && s.window == window)
    }

    /// Writes `<label>_trace.<ext>`, `<label>_summary.<ext>`, and
    /// `<label>_config.toml` under `dir`, returning the paths written.
    pub fn export(&self, dir: &Path, format: ExportFormat) -> Result<Vec<PathBuf>, HarnessError> {
        fs::create_dir_all(dir)?;
        let trace_path = dir.join(format!("{}_trace.{}", self.label, format.extension()));
        let summary_path = dir.join(format!("{}_summary.{}", self.label, format.extension()));
        let config_path = dir.join(format!("{}_config.toml", self.label));
        match format {
            ExportFormat::Csv => {
                write_csv(&trace_path, &TRACE_COLUMNS, self.records.iter().map(trace_fields))?;
                write_csv(
                    &summary_path,
                    &SUMMARY_COLUMNS,
                    self.summaries.iter().map(summary_fields),
                )?;
            }
            ExportFormat::Jsonl => {
                write_jsonl(&trace_path, &self.records)?;
                write_jsonl(&summary_path, &self.summaries)?;
            }
        }
        fs::write(&config_path, &self.config_echo)?;
        Ok(vec![trace_path, summary_path, config_path])
    }
}

/// Formats a float with the shortest representation that parses back to the
/// identical value, so CSV and JSON exports agree bit-for-bit after parsing.
fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";")
}

fn parse_floats(s: &str) -> Result<Vec<f64>, HarnessError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("bad float list entry `{p}`: {e}")))
        })
        .collect()
}

fn trace_fields(r: &RunRecord) -> Vec<String> {
    vec![
        r.cell.clone(),
        r.drop_index.to_string(),
        r.scheduler.clone(),
        r.window.to_string(),
        r.t.to_string(),
        r.is_final.to_string(),
        fmt_f64(r.mean_utility_bps_hz),
        fmt_f64(r.mean_utility_mbps),
        join_floats(&r.share_ul),
        join_floats(&r.share_dl),
        join_floats(&r.threshold_ul),
        join_floats(&r.threshold_dl),
        r.n_windows.to_string(),
        r.window_violations.to_string(),
        r.stream_checksum.to_string(),
    ]
}

fn summary_fields(s: &SummaryRecord) -> Vec<String> {
    vec![
        s.cell.clone(),
        s.scheduler.clone(),
        s.window.to_string(),
        s.n_drops.to_string(),
        s.n_windows.to_string(),
        s.window_violations.to_string(),
        fmt_f64(s.mean_utility_bps_hz),
        fmt_f64(s.std_err_bps_hz),
        fmt_f64(s.mean_utility_mbps),
        s.gain_percent_vs_hd.map(fmt_f64).unwrap_or_default(),
        fmt_f64(s.min_share_margin),
    ]
}

fn write_csv<I>(path: &Path, columns: &[&str], rows: I) -> Result<(), HarnessError>
where
    I: Iterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut text = String::new();
    for row in rows {
        text.push_str(&serde_json::to_string(row)?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

struct ColumnIndex {
    positions: Vec<usize>,
}

impl ColumnIndex {
    fn new(headers: &csv::StringRecord, columns: &[&str]) -> Result<ColumnIndex, HarnessError> {
        let mut positions = Vec::with_capacity(columns.len());
        for col in columns {
            let pos = headers.iter().position(|h| h == *col).ok_or_else(|| {
                HarnessError::Config(format!("exported file is missing column `{col}`"))
            })?;
            positions.push(pos);
        }
        Ok(ColumnIndex { positions })
    }

    fn get<'a>(&self, row: &'a csv::StringRecord, col: usize) -> Result<&'a str, HarnessError> {
        row.get(self.positions[col])
            .ok_or_else(|| HarnessError::Config("short row in exported file".into()))
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T, HarnessError>
where
    T::Err: fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| HarnessError::Config(format!("bad {what} value `{s}`: {e}")))
}

/// Reads a trace file written by [`MetricsReport::export`].
pub fn read_trace(path: &Path, format: ExportFormat) -> Result<Vec<RunRecord>, HarnessError> {
    match format {
        ExportFormat::Jsonl => read_jsonl(path),
        ExportFormat::Csv => {
            let mut reader = csv::Reader::from_path(path)?;
            let idx = ColumnIndex::new(reader.headers()?, &TRACE_COLUMNS)?;
            let mut out = Vec::new();
            for row in reader.records() {
                let row = row?;
                out.push(RunRecord {
                    cell: idx.get(&row, 0)?.to_string(),
                    drop_index: parse_num(idx.get(&row, 1)?, "drop_index")?,
                    scheduler: idx.get(&row, 2)?.to_string(),
                    window: parse_num(idx.get(&row, 3)?, "window")?,
                    t: parse_num(idx.get(&row, 4)?, "t")?,
                    is_final: parse_num(idx.get(&row, 5)?, "is_final")?,
                    mean_utility_bps_hz: parse_num(idx.get(&row, 6)?, "mean_utility_bps_hz")?,
                    mean_utility_mbps: parse_num(idx.get(&row, 7)?, "mean_utility_mbps")?,
                    share_ul: parse_floats(idx.get(&row, 8)?)?,
                    share_dl: parse_floats(idx.get(&row, 9)?)?,
                    threshold_ul: parse_floats(idx.get(&row, 10)?)?,
                    threshold_dl: parse_floats(idx.get(&row, 11)?)?,
                    n_windows: parse_num(idx.get(&row, 12)?, "n_windows")?,
                    window_violations: parse_num(idx.get(&row, 13)?, "window_violations")?,
                    stream_checksum: parse_num(idx.get(&row, 14)?, "stream_checksum")?,
                });
            }
            Ok(out)
        }
    }
}

/// Reads a summary file written by [`MetricsReport::export`].
pub fn read_summaries(
    path: &Path,
    format: ExportFormat,
) -> Result<Vec<SummaryRecord>, HarnessError> {
    match format {
        ExportFormat::Jsonl => read_jsonl(path),
        ExportFormat::Csv => {
            let mut reader = csv::Reader::from_path(path)?;
            let idx = ColumnIndex::new(reader.headers()?, &SUMMARY_COLUMNS)?;
            let mut out = Vec::new();
            for row in reader.records() {
                let row = row?;
                let gain = idx.get(&row, 9)?;
                out.push(SummaryRecord {
                    cell: idx.get(&row, 0)?.to_string(),
                    scheduler: idx.get(&row, 1)?.to_string(),
                    window: parse_num(idx.get(&row, 2)?, "window")?,
                    n_drops: parse_num(idx.get(&row, 3)?, "n_drops")?,
                    n_windows: parse_num(idx.get(&row, 4)?, "n_windows")?,
                    window_violations: parse_num(idx.get(&row, 5)?, "window_violations")?,
                    mean_utility_bps_hz: parse_num(idx.get(&row, 6)?, "mean_utility_bps_hz")?,
                    std_err_bps_hz: parse_num(idx.get(&row, 7)?, "std_err_bps_hz")?,
                    mean_utility_mbps: parse_num(idx.get(&row, 8)?, "mean_utility_mbps")?,
                    gain_percent_vs_hd: if gain.is_empty() {
                        None
                    } else {
                        Some(parse_num(gain, "gain_percent_vs_hd")?)
                    },
                    min_share_margin: parse_num(idx.get(&row, 10)?, "min_share_margin")?,
                });
            }
            Ok(out)
        }
    }
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(HarnessError::from))
        .collect()
}
