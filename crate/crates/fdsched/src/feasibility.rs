//! Feasibility of temporal share demands, long-term and over finite windows.
//!
//! A demand vector asks that user `i` be active in the uplink for at least a
//! `w_ul[i]` fraction of slots (and similarly for the downlink). Long-term
//! feasibility of equality demands reduces to four linear inequalities:
//! per-direction sums at most 1, joint sum at least 1, and per-user sums at
//! most 1. Over a finite window of `s` slots the demands must additionally
//! decompose into an integer table of virtual-user activations, which this
//! module solves as a transportation problem with forbidden diagonal via
//! augmenting-path max flow; the same flow core constructs fractional
//! long-term witness schedules.

use crate::virtual_user::VirtualUser;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the feasibility inequalities and integrality snapping.
const EPS: f64 = 1e-9;

/// Errors raised by demand validation and feasibility checks.
#[derive(Debug, Error)]
pub enum DemandError {
    /// The demand vectors are structurally malformed.
    #[error("invalid demands: {0}")]
    Invalid(String),
    /// A window-scaled demand `s * w` is not an integer slot count.
    #[error("window of {s} slots makes {direction} demand of user {user} non-integral: {value}")]
    NonIntegral { s: u64, direction: &'static str, user: usize, value: f64 },
    /// A witness was requested for demands that fail the feasibility test.
    #[error("demands are infeasible: {0}")]
    Infeasible(String),
}

// ---------------------------------------------------------------------------
// Max-flow core
// ---------------------------------------------------------------------------

/// Minimal Edmonds-Karp max-flow over f64 capacities. Integer-valued
/// capacities yield exactly integer flows; fractional capacities are used
/// for the continuous witness construction.
pub(crate) mod flow {
    const RESIDUAL_EPS: f64 = 1e-12;

    pub struct Network {
        adj: Vec<Vec<usize>>,
        to: Vec<usize>,
        cap: Vec<f64>,
        orig: Vec<f64>,
    }

    impl Network {
        pub fn new(nodes: usize) -> Network {
            Network { adj: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), orig: Vec::new() }
        }

        /// Adds a directed edge and returns its handle for flow queries.
        pub fn add_edge(&mut self, u: usize, v: usize, c: f64) -> usize {
            let e = self.to.len();
            self.to.push(v);
            self.cap.push(c);
            self.orig.push(c);
            self.adj[u].push(e);
            self.to.push(u);
            self.cap.push(0.0);
            self.orig.push(0.0);
            self.adj[v].push(e + 1);
            e
        }

        /// Flow currently routed through edge `e`.
        pub fn flow(&self, e: usize) -> f64 {
            self.orig[e] - self.cap[e]
        }

        /// Runs Edmonds-Karp from `s` to `t` and returns the max-flow value.
        pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
            let mut total = 0.0;
            loop {
                let mut prev: Vec<Option<usize>> = vec![None; self.adj.len()];
                let mut queue = std::collections::VecDeque::new();
                queue.push_back(s);
                prev[s] = Some(usize::MAX);
                while let Some(u) = queue.pop_front() {
                    if u == t {
                        break;
                    }
                    for &e in &self.adj[u] {
                        let v = self.to[e];
                        if prev[v].is_none() && self.cap[e] > RESIDUAL_EPS {
                            prev[v] = Some(e);
                            queue.push_back(v);
                        }
                    }
                }
                if prev[t].is_none() {
                    return total;
                }
                let mut bottleneck = f64::INFINITY;
                let mut v = t;
                while v != s {
                    let e = prev[v].unwrap();
                    bottleneck = bottleneck.min(self.cap[e]);
                    v = self.to[e ^ 1];
                }
                let mut v = t;
                while v != s {
                    let e = prev[v].unwrap();
                    self.cap[e] -= bottleneck;
                    self.cap[e ^ 1] += bottleneck;
                    v = self.to[e ^ 1];
                }
                total += bottleneck;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Demands
// ---------------------------------------------------------------------------

/// Per-user lower and upper bounds on long-run activation shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalDemands {
    /// Minimum uplink share of each user.
    pub lower_ul: Vec<f64>,
    /// Minimum downlink share of each user.
    pub lower_dl: Vec<f64>,
    /// Maximum uplink share of each user.
    pub upper_ul: Vec<f64>,
    /// Maximum downlink share of each user.
    pub upper_dl: Vec<f64>,
}

impl TemporalDemands {
    /// Lower bounds only; upper bounds default to 1 (no cap).
    pub fn with_lower(lower_ul: Vec<f64>, lower_dl: Vec<f64>) -> TemporalDemands {
        let n = lower_ul.len();
        TemporalDemands { lower_ul, lower_dl, upper_ul: vec![1.0; n], upper_dl: vec![1.0; n] }
    }

    /// Exact target shares: upper bounds equal lower bounds.
    pub fn equality(w_ul: Vec<f64>, w_dl: Vec<f64>) -> TemporalDemands {
        TemporalDemands {
            upper_ul: w_ul.clone(),
            upper_dl: w_dl.clone(),
            lower_ul: w_ul,
            lower_dl: w_dl,
        }
    }

    /// Number of users the demands cover.
    pub fn n_users(&self) -> usize {
        self.lower_ul.len()
    }

    /// Checks the structural invariants of the demand box.
    pub fn validate(&self) -> Result<(), DemandError> {
        let n = self.lower_ul.len();
        if n == 0 {
            return Err(DemandError::Invalid("demands must cover at least one user".into()));
        }
        if self.lower_dl.len() != n || self.upper_ul.len() != n || self.upper_dl.len() != n {
            return Err(DemandError::Invalid("demand vectors must have equal lengths".into()));
        }
        for (name, lo, hi) in [
            ("uplink", &self.lower_ul, &self.upper_ul),
            ("downlink", &self.lower_dl, &self.upper_dl),
        ] {
            for i in 0..n {
                if !(0.0..=1.0).contains(&lo[i]) || !(0.0..=1.0).contains(&hi[i]) {
                    return Err(DemandError::Invalid(format!(
                        "{name} demand of user {i} outside [0, 1]"
                    )));
                }
                if lo[i] > hi[i] + EPS {
                    return Err(DemandError::Invalid(format!(
                        "{name} lower demand of user {i} exceeds its upper demand"
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Long-term feasibility
// ---------------------------------------------------------------------------

/// Whether exact target shares `(w_ul, w_dl)` are schedulable in the long
/// run: each direction's shares sum to at most 1, the joint sum reaches 1,
/// and no single half-duplex user needs more than all of the time.
pub fn feasible_longterm(w_ul: &[f64], w_dl: &[f64]) -> bool {
    assert_eq!(w_ul.len(), w_dl.len(), "share vectors must have equal lengths");
    let sum_ul: f64 = w_ul.iter().sum();
    let sum_dl: f64 = w_dl.iter().sum();
    sum_ul <= 1.0 + EPS
        && sum_dl <= 1.0 + EPS
        && sum_ul + sum_dl >= 1.0 - EPS
        && w_ul.iter().zip(w_dl).all(|(&u, &d)| u + d <= 1.0 + EPS)
}

/// Whether some share vector inside the demand box is long-term feasible.
pub fn feasible_longterm_box(d: &TemporalDemands) -> Result<bool, DemandError> {
    d.validate()?;
    let n = d.n_users();
    let sum_lul: f64 = d.lower_ul.iter().sum();
    let sum_ldl: f64 = d.lower_dl.iter().sum();
    if sum_lul > 1.0 + EPS || sum_ldl > 1.0 + EPS {
        return Ok(false);
    }
    for i in 0..n {
        if d.lower_ul[i] + d.lower_dl[i] > 1.0 + EPS {
            return Ok(false);
        }
    }
    // Starting from the lower bounds, the joint sum must be raisable to 1
    // without breaking the per-direction or per-user caps. The maximum raise
    // is a max-flow: per-direction budgets feed per-user raises, each user
    // accepting at most its per-user slack.
    let deficit = 1.0 - sum_lul - sum_ldl;
    if deficit <= EPS {
        return Ok(true);
    }
    let (src, snk, ul_node, dl_node) = (0, 1, 2, 3);
    let user0 = 4;
    let mut net = flow::Network::new(user0 + n);
    net.add_edge(src, ul_node, 1.0 - sum_lul);
    net.add_edge(src, dl_node, 1.0 - sum_ldl);
    for i in 0..n {
        net.add_edge(ul_node, user0 + i, (d.upper_ul[i] - d.lower_ul[i]).max(0.0));
        net.add_edge(dl_node, user0 + i, (d.upper_dl[i] - d.lower_dl[i]).max(0.0));
        net.add_edge(user0 + i, snk, (1.0 - d.lower_ul[i] - d.lower_dl[i]).max(0.0));
    }
    Ok(net.max_flow(src, snk) >= deficit - EPS)
}

// ---------------------------------------------------------------------------
// Long-term witness
// ---------------------------------------------------------------------------

/// A fractional long-run schedule: `fraction[i][j]` is the fraction of slots
/// assigned to the virtual user at grid cell `(i, j)` (0 = idle direction).
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSchedule {
    n: usize,
    fraction: Vec<f64>,
}

impl FractionalSchedule {
    /// Number of users.
    pub fn n_users(&self) -> usize {
        self.n
    }

    /// Fraction of slots spent on grid cell `(i, j)`.
    pub fn fraction(&self, i: usize, j: usize) -> f64 {
        self.fraction[i * (self.n + 1) + j]
    }

    /// Sum of all fractions (1 for a valid schedule).
    pub fn total(&self) -> f64 {
        self.fraction.iter().sum()
    }

    /// Long-run uplink share of user `i` under this schedule.
    pub fn share_ul(&self, i: usize) -> f64 {
        (0..=self.n).filter(|&j| j != i + 1).map(|j| self.fraction(i + 1, j)).sum()
    }

    /// Long-run downlink share of user `j` under this schedule.
    pub fn share_dl(&self, j: usize) -> f64 {
        (0..=self.n).filter(|&i| i != j + 1).map(|i| self.fraction(i, j + 1)).sum()
    }
}

/// Constructs a fractional schedule meeting exact target shares, proving
/// long-term feasibility constructively. The full-duplex fraction
/// `sum(w_ul) + sum(w_dl) - 1` is routed through a diagonal-free
/// transportation network by augmenting paths (a plain greedy pairing sweep
/// can strand demand), and the residual demands become half-duplex slots.
pub fn longterm_witness(
    w_ul: &[f64],
    w_dl: &[f64],
) -> Result<FractionalSchedule, DemandError> {
    let n = w_ul.len();
    if w_dl.len() != n || n == 0 {
        return Err(DemandError::Invalid("share vectors must be nonempty and equal".into()));
    }
    if !feasible_longterm(w_ul, w_dl) {
        return Err(DemandError::Infeasible(
            "target shares violate a long-term feasibility inequality".into(),
        ));
    }
    let sum_ul: f64 = w_ul.iter().sum();
    let sum_dl: f64 = w_dl.iter().sum();
    let alpha = (sum_ul + sum_dl - 1.0).max(0.0);

    let mut fraction = vec![0.0; (n + 1) * (n + 1)];
    let mut row_used = vec![0.0; n];
    let mut col_used = vec![0.0; n];
    if alpha > EPS {
        let (limit, src, snk) = (0, 1, 2);
        let (row0, col0) = (3, 3 + n);
        let mut net = flow::Network::new(3 + 2 * n);
        net.add_edge(limit, src, alpha);
        let mut row_edges = Vec::with_capacity(n);
        let mut pair_edges = vec![vec![usize::MAX; n]; n];
        for i in 0..n {
            row_edges.push(net.add_edge(src, row0 + i, w_ul[i]));
        }
        for j in 0..n {
            net.add_edge(col0 + j, snk, w_dl[j]);
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pair_edges[i][j] = net.add_edge(row0 + i, col0 + j, w_ul[i].min(w_dl[j]));
                }
            }
        }
        let routed = net.max_flow(limit, snk);
        debug_assert!(
            routed >= alpha - 1e-6,
            "feasible demands always admit a full FD pairing ({routed} < {alpha})"
        );
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let f = net.flow(pair_edges[i][j]).max(0.0);
                    fraction[(i + 1) * (n + 1) + (j + 1)] = f;
                    row_used[i] += f;
                    col_used[j] += f;
                }
            }
        }
    }
    for i in 0..n {
        fraction[(i + 1) * (n + 1)] = (w_ul[i] - row_used[i]).max(0.0);
    }
    for j in 0..n {
        fraction[j + 1] = (w_dl[j] - col_used[j]).max(0.0);
    }
    Ok(FractionalSchedule { n, fraction })
}

/// Constructs a fractional schedule whose shares sit inside the demand box,
/// proving box feasibility constructively.
///
/// Lower bounds are raised just enough to fill all of the time (a limited
/// max-flow respecting the per-direction, per-user, and upper-bound slack),
/// and the raised exact shares are scheduled with [`longterm_witness`].
pub fn longterm_witness_box(d: &TemporalDemands) -> Result<FractionalSchedule, DemandError> {
    d.validate()?;
    let n = d.n_users();
    let sum_lul: f64 = d.lower_ul.iter().sum();
    let sum_ldl: f64 = d.lower_dl.iter().sum();
    if sum_lul > 1.0 + EPS || sum_ldl > 1.0 + EPS {
        return Err(DemandError::Infeasible(
            "a direction's lower demands alone exceed all of the time".into(),
        ));
    }
    for i in 0..n {
        if d.lower_ul[i] + d.lower_dl[i] > 1.0 + EPS {
            return Err(DemandError::Infeasible(format!(
                "user {i} demands more than all of the time across both directions"
            )));
        }
    }
    let mut w_ul = d.lower_ul.clone();
    let mut w_dl = d.lower_dl.clone();
    let deficit = 1.0 - sum_lul - sum_ldl;
    if deficit > EPS {
        let (limit, src, snk, ul_node, dl_node) = (0, 1, 2, 3, 4);
        let user0 = 5;
        let mut net = flow::Network::new(user0 + n);
        net.add_edge(limit, src, deficit);
        net.add_edge(src, ul_node, 1.0 - sum_lul);
        net.add_edge(src, dl_node, 1.0 - sum_ldl);
        let mut ul_edges = Vec::with_capacity(n);
        let mut dl_edges = Vec::with_capacity(n);
        for i in 0..n {
            ul_edges.push(net.add_edge(ul_node, user0 + i, (d.upper_ul[i] - d.lower_ul[i]).max(0.0)));
            dl_edges.push(net.add_edge(dl_node, user0 + i, (d.upper_dl[i] - d.lower_dl[i]).max(0.0)));
            net.add_edge(user0 + i, snk, (1.0 - d.lower_ul[i] - d.lower_dl[i]).max(0.0));
        }
        let routed = net.max_flow(limit, snk);
        if routed < deficit - EPS {
            return Err(DemandError::Infeasible(
                "the demand box cannot be raised to fill all of the time".into(),
            ));
        }
        for i in 0..n {
            w_ul[i] = (w_ul[i] + net.flow(ul_edges[i]).max(0.0)).min(d.upper_ul[i]);
            w_dl[i] = (w_dl[i] + net.flow(dl_edges[i]).max(0.0)).min(d.upper_dl[i]);
        }
    }
    longterm_witness(&w_ul, &w_dl)
}

// ---------------------------------------------------------------------------
// Short-term feasibility
// ---------------------------------------------------------------------------

/// An integer allocation of a window of `s` slots to virtual users:
/// `count[i][j]` slots go to grid cell `(i, j)` (0 = idle direction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAllocation {
    n: usize,
    /// Window length in slots.
    pub s: u64,
    count: Vec<u64>,
}

impl SlotAllocation {
    /// Number of users.
    pub fn n_users(&self) -> usize {
        self.n
    }

    /// Slots allocated to grid cell `(i, j)`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.count[i * (self.n + 1) + j]
    }

    /// Checks every structural condition of a valid window allocation:
    /// exact per-user row/column sums, total `s`, and an empty diagonal.
    pub fn verify(&self, k_ul: &[u64], k_dl: &[u64]) -> bool {
        let n = self.n;
        if k_ul.len() != n || k_dl.len() != n {
            return false;
        }
        let mut total = 0u64;
        for i in 0..=n {
            for j in 0..=n {
                if i == j && self.count(i, j) != 0 {
                    return false;
                }
                total += self.count(i, j);
            }
        }
        if total != self.s {
            return false;
        }
        for i in 0..n {
            let row: u64 = (0..=n).map(|j| self.count(i + 1, j)).sum();
            let col: u64 = (0..=n).map(|g| self.count(g, i + 1)).sum();
            if row != k_ul[i] || col != k_dl[i] {
                return false;
            }
        }
        true
    }
}

/// Snaps `s * w` to integer slot counts, rejecting non-integral demands.
fn window_counts(s: u64, w: &[f64], direction: &'static str) -> Result<Vec<u64>, DemandError> {
    let mut k = Vec::with_capacity(w.len());
    for (user, &share) in w.iter().enumerate() {
        if !(0.0..=1.0).contains(&share) {
            return Err(DemandError::Invalid(format!(
                "{direction} share of user {user} outside [0, 1]"
            )));
        }
        let scaled = s as f64 * share;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > EPS {
            return Err(DemandError::NonIntegral { s, direction, user, value: scaled });
        }
        k.push(rounded as u64);
    }
    Ok(k)
}

/// Decides whether exact target shares are schedulable within a window of
/// `s` slots and, if so, returns an integer witness allocation.
///
/// Non-integral `s * w` demands are reported as an error, distinct from the
/// structural infeasibility signalled by `Ok(None)`.
pub fn feasible_shortterm(
    s: u64,
    w_ul: &[f64],
    w_dl: &[f64],
) -> Result<Option<SlotAllocation>, DemandError> {
    if s == 0 {
        return Err(DemandError::Invalid("window must contain at least one slot".into()));
    }
    let n = w_ul.len();
    if w_dl.len() != n || n == 0 {
        return Err(DemandError::Invalid("share vectors must be nonempty and equal".into()));
    }
    let k_ul = window_counts(s, w_ul, "uplink")?;
    let k_dl = window_counts(s, w_dl, "downlink")?;
    Ok(allocate_window(s, &k_ul, &k_dl))
}

/// Integer-count version of the window feasibility test.
pub fn allocate_window(s: u64, k_ul: &[u64], k_dl: &[u64]) -> Option<SlotAllocation> {
    let n = k_ul.len();
    let sum_ul: u64 = k_ul.iter().sum();
    let sum_dl: u64 = k_dl.iter().sum();
    if sum_ul > s || sum_dl > s || sum_ul + sum_dl < s {
        return None;
    }
    // Exactly `sum_ul + sum_dl - s` slots must carry a full-duplex pairing;
    // route that many units through the diagonal-free transportation network.
    let fd_slots = sum_ul + sum_dl - s;
    let mut count = vec![0u64; (n + 1) * (n + 1)];
    let mut row_used = vec![0u64; n];
    let mut col_used = vec![0u64; n];
    if fd_slots > 0 {
        let (limit, src, snk) = (0, 1, 2);
        let (row0, col0) = (3, 3 + n);
        let mut net = flow::Network::new(3 + 2 * n);
        net.add_edge(limit, src, fd_slots as f64);
        for i in 0..n {
            net.add_edge(src, row0 + i, k_ul[i] as f64);
        }
        for j in 0..n {
            net.add_edge(col0 + j, snk, k_dl[j] as f64);
        }
        let mut pair_edges = vec![vec![usize::MAX; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pair_edges[i][j] =
                        net.add_edge(row0 + i, col0 + j, k_ul[i].min(k_dl[j]) as f64);
                }
            }
        }
        let routed = net.max_flow(limit, snk);
        if routed + 0.5 < fd_slots as f64 {
            return None;
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let f = net.flow(pair_edges[i][j]).round() as u64;
                    count[(i + 1) * (n + 1) + (j + 1)] = f;
                    row_used[i] += f;
                    col_used[j] += f;
                }
            }
        }
    }
    for i in 0..n {
        count[(i + 1) * (n + 1)] = k_ul[i] - row_used[i];
    }
    for j in 0..n {
        count[j + 1] = k_dl[j] - col_used[j];
    }
    let alloc = SlotAllocation { n, s, count };
    debug_assert!(alloc.verify(k_ul, k_dl));
    Some(alloc)
}

/// Window feasibility for a demand box: decides whether some integer slot
/// counts inside `[ceil(s·w̲), floor(s·w̄)]` fill a window of `s` slots, and
/// returns a witness allocation at such counts.
///
/// Lower counts are raised just enough to fill the window (a limited integer
/// max-flow respecting per-direction budgets, per-user headroom, and upper
/// bounds); `Ok(None)` signals structural infeasibility.
pub fn allocate_window_box(
    d: &TemporalDemands,
    s: u64,
) -> Result<Option<SlotAllocation>, DemandError> {
    if s == 0 {
        return Err(DemandError::Invalid("window must contain at least one slot".into()));
    }
    d.validate()?;
    let n = d.n_users();
    let ceil_snap = |w: f64| ((s as f64 * w - EPS).ceil()).max(0.0) as u64;
    let floor_snap = |w: f64| ((s as f64 * w + EPS).floor()).max(0.0) as u64;
    let lo_ul: Vec<u64> = d.lower_ul.iter().map(|&w| ceil_snap(w)).collect();
    let lo_dl: Vec<u64> = d.lower_dl.iter().map(|&w| ceil_snap(w)).collect();
    let hi_ul: Vec<u64> = d.upper_ul.iter().map(|&w| floor_snap(w)).collect();
    let hi_dl: Vec<u64> = d.upper_dl.iter().map(|&w| floor_snap(w)).collect();
    for i in 0..n {
        // Real-valued bounds can hold no integer (e.g. 1/3 ≤ w ≤ 1/3 over 16
        // slots), which makes the window infeasible outright.
        if lo_ul[i] > hi_ul[i] || lo_dl[i] > hi_dl[i] || lo_ul[i] + lo_dl[i] > s {
            return Ok(None);
        }
    }
    let sum_lul: u64 = lo_ul.iter().sum();
    let sum_ldl: u64 = lo_dl.iter().sum();
    if sum_lul > s || sum_ldl > s {
        return Ok(None);
    }
    let mut k_ul = lo_ul.clone();
    let mut k_dl = lo_dl.clone();
    let total = sum_lul + sum_ldl;
    if total < s {
        let deficit = (s - total) as f64;
        let (limit, src, snk, ul_node, dl_node) = (0, 1, 2, 3, 4);
        let user0 = 5;
        let mut net = flow::Network::new(user0 + n);
        net.add_edge(limit, src, deficit);
        net.add_edge(src, ul_node, (s - sum_lul) as f64);
        net.add_edge(src, dl_node, (s - sum_ldl) as f64);
        let mut ul_edges = Vec::with_capacity(n);
        let mut dl_edges = Vec::with_capacity(n);
        for i in 0..n {
            ul_edges.push(net.add_edge(ul_node, user0 + i, (hi_ul[i] - lo_ul[i]) as f64));
            dl_edges.push(net.add_edge(dl_node, user0 + i, (hi_dl[i] - lo_dl[i]) as f64));
            net.add_edge(user0 + i, snk, (s - lo_ul[i] - lo_dl[i]) as f64);
        }
        let routed = net.max_flow(limit, snk);
        if routed + 0.5 < deficit {
            return Ok(None);
        }
        for i in 0..n {
            k_ul[i] += net.flow(ul_edges[i]).round() as u64;
            k_dl[i] += net.flow(dl_edges[i]).round() as u64;
        }
    }
    let alloc = allocate_window(s, &k_ul, &k_dl);
    debug_assert!(alloc.is_some(), "a raised count vector always packs into the window");
    Ok(alloc)
}

/// Unrolls an allocation into a concrete slot-by-slot schedule, grouping
/// identical virtual users contiguously in lexicographic grid order.
pub fn witness_schedule(alloc: &SlotAllocation) -> Vec<VirtualUser> {
    let n = alloc.n_users();
    let mut slots = Vec::with_capacity(alloc.s as usize);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                for _ in 0..alloc.count(i, j) {
                    slots.push(VirtualUser::from_grid(i, j));
                }
            }
        }
    }
    slots
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
