//! Slot-by-slot scheduling policies over the per-slot performance matrix.
//!
//! The threshold policy picks the virtual user maximizing sum rate plus the
//! thresholds of its active directions; thresholds act as per-user-direction
//! subsidies that a separate optimizer tunes so long-run activation shares
//! meet demands. The adaptive variant additionally narrows each slot's
//! candidates to those that keep the demands completable within a finite
//! window, turning the long-run guarantee into a hard per-window one.

use crate::feasibility::TemporalDemands;
use crate::rate::PerformanceMatrix;
use crate::virtual_user::{all_virtual_users, VirtualUser, VirtualUserSet};

/// Tolerance when snapping window-scaled demands to integer slot counts.
const SNAP_EPS: f64 = 1e-9;

/// Per-user-direction scheduling subsidies. The idle direction always
/// contributes zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    ul: Vec<f64>,
    dl: Vec<f64>,
}

impl ThresholdVector {
    /// All-zero thresholds for `n` users.
    pub fn zeros(n: usize) -> ThresholdVector {
        ThresholdVector { ul: vec![0.0; n], dl: vec![0.0; n] }
    }

    /// Builds from explicit per-direction values.
    pub fn new(ul: Vec<f64>, dl: Vec<f64>) -> ThresholdVector {
        assert_eq!(ul.len(), dl.len(), "threshold vectors must have equal lengths");
        ThresholdVector { ul, dl }
    }

    /// Number of users.
    pub fn n_users(&self) -> usize {
        self.ul.len()
    }

    /// Uplink thresholds.
    pub fn ul(&self) -> &[f64] {
        &self.ul
    }

    /// Downlink thresholds.
    pub fn dl(&self) -> &[f64] {
        &self.dl
    }

    /// Mutable uplink thresholds.
    pub fn ul_mut(&mut self) -> &mut [f64] {
        &mut self.ul
    }

    /// Mutable downlink thresholds.
    pub fn dl_mut(&mut self) -> &mut [f64] {
        &mut self.dl
    }

    /// Total subsidy of virtual user `v`: the sum of its active directions'
    /// thresholds, idle directions contributing zero.
    pub fn value_of(&self, v: VirtualUser) -> f64 {
        v.ul.map_or(0.0, |i| self.ul[i]) + v.dl.map_or(0.0, |j| self.dl[j])
    }

    /// Smallest threshold across all user directions.
    pub fn min_threshold(&self) -> f64 {
        self.ul.iter().chain(&self.dl).fold(f64::INFINITY, |m, &x| m.min(x))
    }
}

/// Running tally of a scheduling run: slot count, per-user-direction
/// activation counts, and accumulated utility.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleState {
    /// Number of slots scheduled so far.
    pub t: u64,
    count_ul: Vec<u64>,
    count_dl: Vec<u64>,
    /// Sum of the selected virtual users' utilities.
    pub utility_sum: f64,
}

impl ScheduleState {
    /// Fresh tally for `n` users.
    pub fn new(n: usize) -> ScheduleState {
        ScheduleState { t: 0, count_ul: vec![0; n], count_dl: vec![0; n], utility_sum: 0.0 }
    }

    /// Number of users.
    pub fn n_users(&self) -> usize {
        self.count_ul.len()
    }

    /// Records one scheduled slot.
    pub fn apply(&mut self, v: VirtualUser, utility: f64) {
        if let Some(i) = v.ul {
            self.count_ul[i] += 1;
        }
        if let Some(j) = v.dl {
            self.count_dl[j] += 1;
        }
        self.t += 1;
        self.utility_sum += utility;
    }

    /// Slots in which user `i` was active in the uplink.
    pub fn count_ul(&self, i: usize) -> u64 {
        self.count_ul[i]
    }

    /// Slots in which user `j` was active in the downlink.
    pub fn count_dl(&self, j: usize) -> u64 {
        self.count_dl[j]
    }

    /// Empirical uplink share of user `i` (zero before any slot).
    pub fn share_ul(&self, i: usize) -> f64 {
        if self.t == 0 { 0.0 } else { self.count_ul[i] as f64 / self.t as f64 }
    }

    /// Empirical downlink share of user `j` (zero before any slot).
    pub fn share_dl(&self, j: usize) -> f64 {
        if self.t == 0 { 0.0 } else { self.count_dl[j] as f64 / self.t as f64 }
    }

    /// Mean utility per slot (zero before any slot).
    pub fn mean_utility(&self) -> f64 {
        if self.t == 0 { 0.0 } else { self.utility_sum / self.t as f64 }
    }
}

/// Picks the candidate maximizing utility plus threshold subsidy. Ties go to
/// the earliest candidate in lexicographic grid order. Returns `None` only
/// for an empty candidate set.
pub fn tbs_select(
    pm: &PerformanceMatrix,
    th: &ThresholdVector,
    candidates: &VirtualUserSet,
) -> Option<VirtualUser> {
    let mut best: Option<(VirtualUser, f64)> = None;
    for v in candidates.iter() {
        let score = pm.utility_of(v) + th.value_of(v);
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((v, score)),
        }
    }
    best.map(|(v, _)| v)
}

/// Integer slot-count bounds a window of `s` slots imposes per user and
/// direction: meeting share demand `w` over `s` slots means the activation
/// count lands in `[ceil(s*w_lower), floor(s*w_upper)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowCounts {
    /// Window length in slots.
    pub s: u64,
    /// Minimum uplink slots per user.
    pub lo_ul: Vec<u64>,
    /// Minimum downlink slots per user.
    pub lo_dl: Vec<u64>,
    /// Maximum uplink slots per user.
    pub hi_ul: Vec<u64>,
    /// Maximum downlink slots per user.
    pub hi_dl: Vec<u64>,
}

/// Converts share demands into the integer slot-count bounds of a window.
pub fn window_counts(demands: &TemporalDemands, s: u64) -> WindowCounts {
    let ceil_tol = |w: f64| ((s as f64 * w - SNAP_EPS).ceil()).max(0.0) as u64;
    let floor_tol = |w: f64| ((s as f64 * w + SNAP_EPS).floor()).max(0.0) as u64;
    WindowCounts {
        s,
        lo_ul: demands.lower_ul.iter().map(|&w| ceil_tol(w)).collect(),
        lo_dl: demands.lower_dl.iter().map(|&w| ceil_tol(w)).collect(),
        hi_ul: demands.upper_ul.iter().map(|&w| floor_tol(w)).collect(),
        hi_dl: demands.upper_dl.iter().map(|&w| floor_tol(w)).collect(),
    }
}

/// Whether a completed window's activation counts landed inside the demand
/// bounds.
pub fn meets_window_demands(state: &ScheduleState, demands: &TemporalDemands, s: u64) -> bool {
    if state.t != s {
        return false;
    }
    let k = window_counts(demands, s);
    (0..state.n_users()).all(|i| {
        (k.lo_ul[i]..=k.hi_ul[i]).contains(&state.count_ul(i))
            && (k.lo_dl[i]..=k.hi_dl[i]).contains(&state.count_dl(i))
    })
}

/// Whether scheduling `v` in the next slot still allows the window to finish
/// inside the count bounds. `r` slots remain after `v`'s slot.
fn keeps_window_completable(state: &ScheduleState, v: VirtualUser, k: &WindowCounts, r: u64) -> bool {
    let n = state.n_users();
    // Per-direction deficits and headrooms after scheduling `v`.
    let mut du_sum = 0u64;
    let mut dd_sum = 0u64;
    let mut du = vec![0u64; n];
    let mut dd = vec![0u64; n];
    let mut hu = vec![0u64; n];
    let mut hd = vec![0u64; n];
    let mut uppers_bind = false;
    for i in 0..n {
        let cu = state.count_ul(i) + u64::from(v.ul == Some(i));
        let cd = state.count_dl(i) + u64::from(v.dl == Some(i));
        if cu > k.hi_ul[i] || cd > k.hi_dl[i] {
            return false;
        }
        du[i] = k.lo_ul[i].saturating_sub(cu);
        dd[i] = k.lo_dl[i].saturating_sub(cd);
        hu[i] = k.hi_ul[i] - cu;
        hd[i] = k.hi_dl[i] - cd;
        if du[i] > hu[i] || dd[i] > hd[i] {
            return false;
        }
        if du[i] + dd[i] > r {
            return false;
        }
        du_sum += du[i];
        dd_sum += dd[i];
        uppers_bind |= hu[i] < r || hd[i] < r;
    }
    if du_sum > r || dd_sum > r {
        return false;
    }
    // Without binding upper bounds, deficit slots can be padded with
    // arbitrary activations, so the sum and per-user checks above suffice.
    if !uppers_bind {
        return true;
    }
    // Otherwise every remaining slot must activate at least one direction
    // without busting an upper bound: raise the deficits to fill all `r`
    // slots through the capacity network.
    let needed = r as f64 - du_sum as f64 - dd_sum as f64;
    if needed <= 0.0 {
        return true;
    }
    let (src, snk, ul_node, dl_node) = (0, 1, 2, 3);
    let user0 = 4;
    let mut net = crate::feasibility::flow::Network::new(user0 + n);
    net.add_edge(src, ul_node, (r - du_sum) as f64);
    net.add_edge(src, dl_node, (r - dd_sum) as f64);
    for i in 0..n {
        net.add_edge(ul_node, user0 + i, (hu[i] - du[i]) as f64);
        net.add_edge(dl_node, user0 + i, (hd[i] - dd[i]) as f64);
        net.add_edge(user0 + i, snk, (r - du[i] - dd[i]) as f64);
    }
    net.max_flow(src, snk) >= needed - 0.5
}

/// Candidates that keep the demand bounds completable within the window.
///
/// `state` holds the window's progress so far (`state.t` slots done out of
/// `s`). Feasible demands entered through a completable sequence always
/// leave at least one candidate; infeasible windows yield an empty set.
pub fn atbs_feasible_set(
    state: &ScheduleState,
    demands: &TemporalDemands,
    s: u64,
) -> VirtualUserSet {
    assert!(state.t < s, "window of {s} slots has no slot {} to schedule", state.t);
    let n = state.n_users();
    let k = window_counts(demands, s);
    let r = s - state.t - 1;
    let mut set = VirtualUserSet::empty(n);
    for v in all_virtual_users(n) {
        if keeps_window_completable(state, v, &k, r) {
            set.insert(v);
        }
    }
    set
}

/// Threshold selection restricted to the window-completable candidates.
pub fn atbs_select(
    pm: &PerformanceMatrix,
    th: &ThresholdVector,
    state: &ScheduleState,
    demands: &TemporalDemands,
    s: u64,
) -> Option<VirtualUser> {
    tbs_select(pm, th, &atbs_feasible_set(state, demands, s))
}
