//! Experiment drivers: long-term learning runs, paired gain sweeps, and
//! hard-guarantee window evaluation.
//!
//! Drops are independent work units executed in parallel; each drop's slot
//! loop is sequential. All randomness derives from the master seed: drop `k`
//! uses seed `mix(master, k)` and its fading streams use
//! `mix(master, k, phase)`, so schedulers compared on the same drop and
//! phase consume identical realizations (verified via stream checksums).

use rayon::prelude::*;

use crate::channel::{mix_seed, CellDrop, Placement};
use crate::feasibility::{feasible_longterm_box, TemporalDemands};
use crate::rate::{performance_matrix, RateParams, SicCapability};
use crate::scheduler::{
    atbs_feasible_set, meets_window_demands, tbs_select, window_counts, ScheduleState,
    ThresholdVector,
};
use crate::threshopt::OptimizerState;
use crate::virtual_user::VirtualUserSet;

use super::config::{SchedulerKind, SicScenario, SimConfig};
use super::report::{MetricsReport, RunRecord, SummaryRecord};
use super::HarnessError;

/// Axis of a paired full-duplex vs. half-duplex gain sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Self-interference mitigation at the base station: 60, 80, 100 dB.
    Sim,
    /// User placement (uniform, one hotspot, two hotspots) crossed with
    /// cancellation capability (none, all users).
    Placement,
}

impl std::str::FromStr for SweepAxis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<SweepAxis, HarnessError> {
        match s.to_ascii_lowercase().as_str() {
            "sim" => Ok(SweepAxis::Sim),
            "placement" => Ok(SweepAxis::Placement),
            other => Err(HarnessError::Config(format!(
                "unknown sweep axis `{other}` (expected `sim` or `placement`)"
            ))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Sim => "sim",
            SweepAxis::Placement => "placement",
        })
    }
}

/// Stream-phase salts: learning and evaluation consume disjoint fading
/// streams of the same drop.
const PHASE_LEARN: u64 = 0x4C45_4152;
const PHASE_EVAL: u64 = 0x4556_414C;

/// Seeds derived for one drop: the drop itself plus its two fading streams.
///
/// Published so exported results can be reproduced externally: regenerate
/// the drop from `drop`, then replay the learning phase on `learn_stream`
/// or the evaluation phase on `eval_stream`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropSeeds {
    /// Seed for the drop's geometry and shadowing.
    pub drop: u64,
    /// Seed of the fading stream used while learning thresholds.
    pub learn_stream: u64,
    /// Seed of the fading stream used by frozen-threshold evaluation runs.
    pub eval_stream: u64,
}

/// Deterministic seed derivation used by every driver.
pub fn derive_seeds(cfg: &SimConfig, drop_index: u64) -> DropSeeds {
    DropSeeds {
        drop: mix_seed(&[cfg.master_seed, drop_index]),
        learn_stream: learn_stream_seed(cfg, drop_index),
        eval_stream: eval_stream_seed(cfg, drop_index),
    }
}

/// Cell label used outside sweeps.
const BASE_CELL: &str = "base";

/// One generated drop with its derived rate-model parameters.
struct DropSim {
    drop: CellDrop,
    params: RateParams,
    sic: SicCapability,
}

fn build_drop(cfg: &SimConfig, drop_index: u64) -> Result<DropSim, HarnessError> {
    let seed = mix_seed(&[cfg.master_seed, drop_index]);
    let drop = CellDrop::generate(&cfg.cell, &cfg.channel, seed)?;
    let params = RateParams::new(&cfg.channel, &drop);
    let sic = cfg.run.scenario.capability(cfg.cell.n_users);
    Ok(DropSim { drop, params, sic })
}

fn learn_stream_seed(cfg: &SimConfig, drop_index: u64) -> u64 {
    mix_seed(&[cfg.master_seed, drop_index, PHASE_LEARN])
}

fn eval_stream_seed(cfg: &SimConfig, drop_index: u64) -> u64 {
    mix_seed(&[cfg.master_seed, drop_index, PHASE_EVAL])
}

/// Snapshot of a run after `t` slots.
struct Checkpoint {
    t: u64,
    is_final: bool,
    mean_utility: f64,
    share_ul: Vec<f64>,
    share_dl: Vec<f64>,
    threshold_ul: Vec<f64>,
    threshold_dl: Vec<f64>,
    n_windows: u64,
    window_violations: u64,
    checksum: u64,
}

impl Checkpoint {
    fn take(state: &ScheduleState, th: &ThresholdVector, is_final: bool, checksum: u64) -> Self {
        let n = state.n_users();
        Checkpoint {
            t: state.t,
            is_final,
            mean_utility: state.mean_utility(),
            share_ul: (0..n).map(|i| state.share_ul(i)).collect(),
            share_dl: (0..n).map(|j| state.share_dl(j)).collect(),
            threshold_ul: th.ul().to_vec(),
            threshold_dl: th.dl().to_vec(),
            n_windows: 0,
            window_violations: 0,
            checksum,
        }
    }

    fn into_record(
        self,
        cell: &str,
        drop_index: u64,
        scheduler: &str,
        window: u64,
        bandwidth_hz: f64,
    ) -> RunRecord {
        RunRecord {
            cell: cell.to_string(),
            drop_index,
            scheduler: scheduler.to_string(),
            window,
            t: self.t,
            is_final: self.is_final,
            mean_utility_bps_hz: self.mean_utility,
            mean_utility_mbps: self.mean_utility * bandwidth_hz / 1.0e6,
            share_ul: self.share_ul,
            share_dl: self.share_dl,
            threshold_ul: self.threshold_ul,
            threshold_dl: self.threshold_dl,
            n_windows: self.n_windows,
            window_violations: self.window_violations,
            stream_checksum: self.checksum,
        }
    }
}

/// Runs online threshold learning for `n_slots`, returning the optimizer,
/// final schedule state, stream checksum, and checkpoint snapshots
/// (including the final one).
fn learn_run(
    sim: &DropSim,
    demands: &TemporalDemands,
    candidates: VirtualUserSet,
    step_size: f64,
    n_slots: u64,
    checkpoint_interval: u64,
    stream_seed: u64,
) -> (OptimizerState, ScheduleState, u64, Vec<Checkpoint>) {
    let n = candidates.n_users();
    let mut opt = OptimizerState::with_candidates(step_size, candidates);
    let mut state = ScheduleState::new(n);
    let mut checksum = 0u64;
    let mut checkpoints = Vec::new();
    for slot in 0..n_slots {
        let real = sim.drop.draw_realization(stream_seed, slot);
        checksum = checksum.rotate_left(1) ^ real.checksum();
        let pm = performance_matrix(&real, &sim.params, &sim.sic);
        let v = opt.step(&pm, demands);
        state.apply(v, pm.utility_of(v));
        let t = slot + 1;
        if t % checkpoint_interval == 0 && t != n_slots {
            checkpoints.push(Checkpoint::take(&state, opt.thresholds(), false, checksum));
        }
    }
    checkpoints.push(Checkpoint::take(&state, opt.thresholds(), true, checksum));
    (opt, state, checksum, checkpoints)
}

/// Runs fixed-threshold selection for `n_slots` without learning.
fn frozen_tbs_run(
    sim: &DropSim,
    th: &ThresholdVector,
    candidates: &VirtualUserSet,
    n_slots: u64,
    stream_seed: u64,
) -> (ScheduleState, u64) {
    let mut state = ScheduleState::new(candidates.n_users());
    let mut checksum = 0u64;
    for slot in 0..n_slots {
        let real = sim.drop.draw_realization(stream_seed, slot);
        checksum = checksum.rotate_left(1) ^ real.checksum();
        let pm = performance_matrix(&real, &sim.params, &sim.sic);
        let v = tbs_select(&pm, th, candidates)
            .expect("a non-empty candidate set always yields a selection");
        state.apply(v, pm.utility_of(v));
    }
    (state, checksum)
}

/// Outcome of a window-constrained run.
struct AtbsRun {
    total: ScheduleState,
    n_windows: u64,
    window_violations: u64,
    checksum: u64,
}

/// Runs window-constrained fixed-threshold selection over `n_windows`
/// windows of `s` slots each, counting windows that missed a demand bound.
fn atbs_run(
    sim: &DropSim,
    th: &ThresholdVector,
    demands: &TemporalDemands,
    s: u64,
    n_windows: u64,
    stream_seed: u64,
) -> AtbsRun {
    let n = demands.n_users();
    let mut total = ScheduleState::new(n);
    let mut violations = 0u64;
    let mut checksum = 0u64;
    for w in 0..n_windows {
        let mut win = ScheduleState::new(n);
        for k in 0..s {
            let slot = w * s + k;
            let real = sim.drop.draw_realization(stream_seed, slot);
            checksum = checksum.rotate_left(1) ^ real.checksum();
            let pm = performance_matrix(&real, &sim.params, &sim.sic);
            let set = atbs_feasible_set(&win, demands, s);
            let v = tbs_select(&pm, th, &set)
                .expect("a feasible window entered through admissible picks stays completable");
            let u = pm.utility_of(v);
            win.apply(v, u);
            total.apply(v, u);
        }
        if !meets_window_demands(&win, demands, s) {
            violations += 1;
        }
    }
    AtbsRun { total, n_windows, window_violations: violations, checksum }
}

/// Groups final rows by (cell, scheduler, window) and aggregates them.
fn summarize_records(
    records: &[RunRecord],
    demands: &TemporalDemands,
    bandwidth_hz: f64,
) -> Vec<SummaryRecord> {
    let mut groups: Vec<((String, String, u64), Vec<&RunRecord>)> = Vec::new();
    for r in records.iter().filter(|r| r.is_final && r.scheduler != "tbs_learn") {
        let key = (r.cell.clone(), r.scheduler.clone(), r.window);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mean_of = |cell: &str, scheduler: &str, window: u64| -> Option<f64> {
        groups.iter().find(|((c, s, w), _)| c == cell && s == scheduler && *w == window).map(
            |(_, rows)| {
                rows.iter().map(|r| r.mean_utility_bps_hz).sum::<f64>() / rows.len() as f64
            },
        )
    };
    let mut out = Vec::new();
    for ((cell, scheduler, window), rows) in &groups {
        let n_drops = rows.len() as u64;
        let mean =
            rows.iter().map(|r| r.mean_utility_bps_hz).sum::<f64>() / n_drops.max(1) as f64;
        let std_err = if n_drops >= 2 {
            let var = rows
                .iter()
                .map(|r| (r.mean_utility_bps_hz - mean).powi(2))
                .sum::<f64>()
                / (n_drops - 1) as f64;
            (var / n_drops as f64).sqrt()
        } else {
            0.0
        };
        let margin = rows
            .iter()
            .flat_map(|r| {
                let ul = r
                    .share_ul
                    .iter()
                    .zip(&demands.lower_ul)
                    .map(|(&a, &w)| a - w);
                let dl = r
                    .share_dl
                    .iter()
                    .zip(&demands.lower_dl)
                    .map(|(&a, &w)| a - w);
                ul.chain(dl).collect::<Vec<f64>>()
            })
            .fold(f64::INFINITY, f64::min);
        let gain = if scheduler != "hd" {
            mean_of(cell, "hd", 0).map(|hd| 100.0 * (mean - hd) / hd)
        } else {
            None
        };
        out.push(SummaryRecord {
            cell: cell.clone(),
            scheduler: scheduler.clone(),
            window: *window,
            n_drops,
            n_windows: rows.iter().map(|r| r.n_windows).sum(),
            window_violations: rows.iter().map(|r| r.window_violations).sum(),
            mean_utility_bps_hz: mean,
            std_err_bps_hz: std_err,
            mean_utility_mbps: mean * bandwidth_hz / 1.0e6,
            gain_percent_vs_hd: gain,
            min_share_margin: if margin.is_finite() { margin } else { 0.0 },
        });
    }
    out
}

fn candidate_set_for(kind: SchedulerKind, n: usize) -> VirtualUserSet {
    match kind {
        SchedulerKind::Hd => VirtualUserSet::hd_only(n),
        _ => VirtualUserSet::full(n),
    }
}

/// Checks the demands against the asymptotic feasibility region, surfacing
/// an infeasibility error suitable for exit-code mapping.
fn require_longterm_feasible(demands: &TemporalDemands) -> Result<(), HarnessError> {
    if !feasible_longterm_box(demands)? {
        return Err(HarnessError::Infeasible(
            "the lower/upper temporal demand box admits no long-term schedule".into(),
        ));
    }
    Ok(())
}

/// Long-term runs: per drop, each requested scheduler learns its thresholds
/// online while cumulative shares and utility are recorded.
///
/// Demands are checked against the asymptotic feasibility region before any
/// simulation starts. Schedulers compared on the same drop consume identical
/// realization streams.
pub fn run_longterm(cfg: &SimConfig) -> Result<MetricsReport, HarnessError> {
    cfg.validate()?;
    let demands = cfg.demands()?;
    require_longterm_feasible(&demands)?;
    if cfg.run.schedulers.contains(&SchedulerKind::Atbs) {
        return Err(HarnessError::Config(
            "window-constrained runs take their window lengths from the short-term driver; \
             list `tbs`/`hd` here instead"
                .into(),
        ));
    }
    let n = cfg.n_users();
    let per_drop: Vec<Vec<RunRecord>> = (0..cfg.run.n_drops)
        .into_par_iter()
        .map(|k| -> Result<Vec<RunRecord>, HarnessError> {
            let sim = build_drop(cfg, k)?;
            let stream = learn_stream_seed(cfg, k);
            let mut rows = Vec::new();
            let mut final_checksums = Vec::new();
            for &kind in &cfg.run.schedulers {
                let (_, _, checksum, checkpoints) = learn_run(
                    &sim,
                    &demands,
                    candidate_set_for(kind, n),
                    cfg.optimizer.step_size,
                    cfg.run.n_slots,
                    cfg.optimizer.checkpoint_interval,
                    stream,
                );
                final_checksums.push(checksum);
                rows.extend(checkpoints.into_iter().map(|cp| {
                    cp.into_record(BASE_CELL, k, kind.label(), 0, cfg.channel.bandwidth_hz)
                }));
            }
            assert!(
                final_checksums.windows(2).all(|w| w[0] == w[1]),
                "schedulers on one drop must consume identical realization streams"
            );
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<RunRecord> = per_drop.into_iter().flatten().collect();
    let summaries = summarize_records(&records, &demands, cfg.channel.bandwidth_hz);
    Ok(MetricsReport {
        label: "longterm".into(),
        master_seed: cfg.master_seed,
        bandwidth_hz: cfg.channel.bandwidth_hz,
        config_echo: cfg.echo_toml(),
        records,
        summaries,
    })
}

/// The sweep cells (label + config override) for an axis.
fn sweep_cells(cfg: &SimConfig, axis: SweepAxis) -> Vec<(String, SimConfig)> {
    let mut cells = Vec::new();
    match axis {
        SweepAxis::Sim => {
            for sim_db in [60.0, 80.0, 100.0] {
                let mut c = cfg.clone();
                c.channel.sim_db = sim_db;
                cells.push((format!("sim={sim_db}"), c));
            }
        }
        SweepAxis::Placement => {
            let placements = [
                ("uniform", Placement::Uniform),
                ("hotspot1", Placement::Hotspot { n_hotspots: 1, radius_m: 10.0 }),
                ("hotspot2", Placement::Hotspot { n_hotspots: 2, radius_m: 10.0 }),
            ];
            let scenarios =
                [("no_sic", SicScenario::NoSic), ("all_sic", SicScenario::AllSic)];
            for (pl_label, placement) in &placements {
                for (sc_label, scenario) in &scenarios {
                    let mut c = cfg.clone();
                    c.cell.placement = placement.clone();
                    c.run.scenario = scenario.clone();
                    cells.push((format!("{pl_label}/{sc_label}"), c));
                }
            }
        }
    }
    for (_, c) in &mut cells {
        c.run.schedulers = vec![SchedulerKind::Tbs, SchedulerKind::Hd];
    }
    cells
}

/// Paired full-duplex vs. half-duplex sweep across one axis.
///
/// Each sweep cell runs the threshold scheduler over all modes and the
/// half-duplex baseline on the same drops and identical fading streams
/// (equality asserted via checksums); the summary carries the percentage
/// gain per cell, computed as a ratio of drop-mean utilities.
pub fn run_gain_sweep(cfg: &SimConfig, axis: SweepAxis) -> Result<MetricsReport, HarnessError> {
    cfg.validate()?;
    let demands = cfg.demands()?;
    require_longterm_feasible(&demands)?;
    let n = cfg.n_users();
    let mut records: Vec<RunRecord> = Vec::new();
    for (label, cell_cfg) in sweep_cells(cfg, axis) {
        let per_drop: Vec<Vec<RunRecord>> = (0..cell_cfg.run.n_drops)
            .into_par_iter()
            .map(|k| -> Result<Vec<RunRecord>, HarnessError> {
                let sim = build_drop(&cell_cfg, k)?;
                let stream = learn_stream_seed(&cell_cfg, k);
                let mut rows = Vec::new();
                let mut checksums = Vec::new();
                for &kind in &cell_cfg.run.schedulers {
                    let (_, _, checksum, checkpoints) = learn_run(
                        &sim,
                        &demands,
                        candidate_set_for(kind, n),
                        cell_cfg.optimizer.step_size,
                        cell_cfg.run.n_slots,
                        cell_cfg.optimizer.checkpoint_interval,
                        stream,
                    );
                    checksums.push(checksum);
                    rows.extend(checkpoints.into_iter().map(|cp| {
                        cp.into_record(&label, k, kind.label(), 0, cell_cfg.channel.bandwidth_hz)
                    }));
                }
                assert!(
                    checksums.windows(2).all(|w| w[0] == w[1]),
                    "paired comparisons must consume identical realization streams"
                );
                Ok(rows)
            })
            .collect::<Result<_, _>>()?;
        records.extend(per_drop.into_iter().flatten());
    }
    let summaries = summarize_records(&records, &demands, cfg.channel.bandwidth_hz);
    Ok(MetricsReport {
        label: format!("sweep_{axis}"),
        master_seed: cfg.master_seed,
        bandwidth_hz: cfg.channel.bandwidth_hz,
        config_echo: cfg.echo_toml(),
        records,
        summaries,
    })
}

/// Checks that every requested window admits a completable schedule and
/// fits into the configured slot budget.
fn validate_windows(
    cfg: &SimConfig,
    demands: &TemporalDemands,
    windows: &[u64],
) -> Result<(), HarnessError> {
    if windows.is_empty() {
        return Err(HarnessError::Config("at least one window length is required".into()));
    }
    for &s in windows {
        if s == 0 {
            return Err(HarnessError::Config("window lengths must be at least 1".into()));
        }
        if s > cfg.run.n_slots {
            return Err(HarnessError::Config(format!(
                "window of {s} slots exceeds the run budget of {} slots",
                cfg.run.n_slots
            )));
        }
        let empty = ScheduleState::new(demands.n_users());
        if atbs_feasible_set(&empty, demands, s).is_empty() {
            let k = window_counts(demands, s);
            return Err(HarnessError::Infeasible(format!(
                "a window of {s} slots cannot meet the demand counts: required minimums \
                 ul={:?}, dl={:?} with maximums ul={:?}, dl={:?} leave no feasible first slot",
                k.lo_ul, k.lo_dl, k.hi_ul, k.hi_dl
            )));
        }
    }
    Ok(())
}

/// Window-constrained evaluation across window lengths.
///
/// Per drop: thresholds are learned online on a learning stream, then frozen
/// and used (a) by an unconstrained reference run and (b) by the
/// window-constrained scheduler for every requested window length, all on
/// one shared evaluation stream. Windows that miss a demand bound are
/// counted (they must stay at zero).
pub fn run_shortterm(cfg: &SimConfig, windows: &[u64]) -> Result<MetricsReport, HarnessError> {
    cfg.validate()?;
    let demands = cfg.demands()?;
    require_longterm_feasible(&demands)?;
    validate_windows(cfg, &demands, windows)?;
    let n = cfg.n_users();
    let bandwidth = cfg.channel.bandwidth_hz;
    let per_drop: Vec<Vec<RunRecord>> = (0..cfg.run.n_drops)
        .into_par_iter()
        .map(|k| -> Result<Vec<RunRecord>, HarnessError> {
            let sim = build_drop(cfg, k)?;
            let mut rows = Vec::new();

            let (opt, _, _, checkpoints) = learn_run(
                &sim,
                &demands,
                VirtualUserSet::full(n),
                cfg.optimizer.step_size,
                cfg.run.n_slots,
                cfg.optimizer.checkpoint_interval,
                learn_stream_seed(cfg, k),
            );
            rows.extend(
                checkpoints
                    .into_iter()
                    .map(|cp| cp.into_record(BASE_CELL, k, "tbs_learn", 0, bandwidth)),
            );
            let th = opt.thresholds().clone();

            let eval_seed = eval_stream_seed(cfg, k);
            let full = VirtualUserSet::full(n);
            let (ref_state, ref_checksum) =
                frozen_tbs_run(&sim, &th, &full, cfg.run.n_slots, eval_seed);
            rows.push(
                Checkpoint::take(&ref_state, &th, true, ref_checksum)
                    .into_record(BASE_CELL, k, "tbs", 0, bandwidth),
            );

            for &s in windows {
                let n_windows = cfg.run.n_slots / s;
                let run = atbs_run(&sim, &th, &demands, s, n_windows, eval_seed);
                if n_windows * s == cfg.run.n_slots {
                    assert_eq!(
                        run.checksum, ref_checksum,
                        "equal-length paired runs must consume identical streams"
                    );
                }
                let mut cp = Checkpoint::take(&run.total, &th, true, run.checksum);
                cp.n_windows = run.n_windows;
                cp.window_violations = run.window_violations;
                rows.push(cp.into_record(BASE_CELL, k, "atbs", s, bandwidth));
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<RunRecord> = per_drop.into_iter().flatten().collect();
    let summaries = summarize_records(&records, &demands, bandwidth);
    Ok(MetricsReport {
        label: "shortterm".into(),
        master_seed: cfg.master_seed,
        bandwidth_hz: bandwidth,
        config_echo: cfg.echo_toml(),
        records,
        summaries,
    })
}
