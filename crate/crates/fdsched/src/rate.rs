//! Transmission modes, SINR formulas, and the per-slot performance matrix.
//!
//! Each slot the base station can activate a virtual user in one of four
//! modes: half-duplex uplink, half-duplex downlink, full-duplex treating
//! inter-user interference as noise (FD-IN), or full-duplex with
//! successive interference cancellation at the downlink user (FD-SIC).
//! Full-duplex entries of the performance matrix are evaluated at the
//! max-min fair transmit-power pair over `[0, p_max_ul] x [0, p_max_dl]`,
//! and the better of the admissible modes is kept.

use crate::channel::{CellDrop, ChannelParams, ChannelRealization};
use crate::virtual_user::{all_virtual_users, VirtualUser};

/// Absolute rate tolerance used when breaking ties between candidate
/// max-min power points.
const TIE_EPS: f64 = 1e-9;

/// Transmission mode of a scheduled virtual user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Uplink only, at full uplink power.
    HdUl,
    /// Downlink only, at full downlink power.
    HdDl,
    /// Both directions; the downlink user treats uplink interference as noise.
    FdIn,
    /// Both directions; the downlink user decodes and cancels the uplink
    /// user's interference before decoding its own signal.
    FdSic,
}

impl Mode {
    /// Stable lowercase label used in exports.
    pub fn label(&self) -> &'static str {
        match self {
            Mode::HdUl => "hd_ul",
            Mode::HdDl => "hd_dl",
            Mode::FdIn => "fd_in",
            Mode::FdSic => "fd_sic",
        }
    }
}

/// Which users are able to perform successive interference cancellation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SicCapability(Vec<bool>);

impl SicCapability {
    /// No user can cancel inter-user interference.
    pub fn none(n: usize) -> SicCapability {
        SicCapability(vec![false; n])
    }

    /// Every user can cancel inter-user interference.
    pub fn all(n: usize) -> SicCapability {
        SicCapability(vec![true; n])
    }

    /// Explicit per-user capability flags.
    pub fn from_flags(flags: Vec<bool>) -> SicCapability {
        SicCapability(flags)
    }

    /// True when user `j` can cancel interference it receives.
    pub fn can_cancel(&self, j: usize) -> bool {
        self.0[j]
    }

    /// Number of users covered by the flags.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when the capability vector is empty.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Scalar link-budget parameters needed to turn channel gains into rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// Uplink (base-station receiver) noise power, watts.
    pub noise_ul_w: f64,
    /// Downlink (user receiver) noise power, watts.
    pub noise_dl_w: f64,
    /// Residual self-interference gain after mitigation, linear.
    pub psi_b: f64,
    /// Spectral-efficiency cap, bps/Hz.
    pub gamma_max: f64,
    /// Maximum uplink transmit power, watts.
    pub p_max_ul_w: f64,
    /// Maximum downlink transmit power, watts.
    pub p_max_dl_w: f64,
}

impl RateParams {
    /// Collects the rate-model parameters of a drop.
    pub fn new(ch: &ChannelParams, drop: &CellDrop) -> RateParams {
        RateParams {
            noise_ul_w: ch.noise_ul_watts(),
            noise_dl_w: ch.noise_dl_watts(),
            psi_b: ch.psi_b(),
            gamma_max: ch.gamma_max,
            p_max_ul_w: drop.p_max_ul_w,
            p_max_dl_w: drop.p_max_dl_w,
        }
    }
}

/// Truncated Shannon spectral efficiency `min(log2(1 + sinr), gamma_max)`.
pub fn truncated_rate(sinr: f64, gamma_max: f64) -> f64 {
    assert!(sinr >= 0.0, "SINR must be nonnegative, got {sinr}");
    assert!(gamma_max > 0.0, "rate cap must be positive");
    (1.0 + sinr).log2().min(gamma_max)
}

/// Uplink and downlink SINR of virtual user `v` operated in `mode` with
/// transmit powers `(p_ul, p_dl)` watts. Idle directions report SINR 0.
pub fn mode_sinrs(
    v: VirtualUser,
    mode: Mode,
    ch: &ChannelRealization,
    p_ul: f64,
    p_dl: f64,
    params: &RateParams,
) -> (f64, f64) {
    match mode {
        Mode::HdUl => {
            let i = v.ul.expect("HD-UL mode requires an uplink user");
            assert!(v.dl.is_none(), "HD-UL mode requires an idle downlink");
            (p_ul * ch.g_sq[i] / params.noise_ul_w, 0.0)
        }
        Mode::HdDl => {
            let j = v.dl.expect("HD-DL mode requires a downlink user");
            assert!(v.ul.is_none(), "HD-DL mode requires an idle uplink");
            (0.0, p_dl * ch.g_sq[j] / params.noise_dl_w)
        }
        Mode::FdIn => {
            let (i, j) = fd_pair(v);
            let ul = p_ul * ch.g_sq[i] / (p_dl * params.psi_b + params.noise_ul_w);
            let dl = p_dl * ch.g_sq[j] / (p_ul * ch.h_sq[i][j] + params.noise_dl_w);
            (ul, dl)
        }
        Mode::FdSic => {
            let (i, j) = fd_pair(v);
            // The uplink stream must also be decodable at the downlink user
            // (before cancellation), so the uplink runs at the weaker of the
            // two decoding SINRs.
            let at_bs = p_ul * ch.g_sq[i] / (p_dl * params.psi_b + params.noise_ul_w);
            let at_user = p_ul * ch.h_sq[i][j] / (p_dl * ch.g_sq[j] + params.noise_dl_w);
            let dl = p_dl * ch.g_sq[j] / params.noise_dl_w;
            (at_bs.min(at_user), dl)
        }
    }
}

fn fd_pair(v: VirtualUser) -> (usize, usize) {
    match (v.ul, v.dl) {
        (Some(i), Some(j)) => (i, j),
        _ => panic!("full-duplex mode requires both an uplink and a downlink user"),
    }
}

/// Rates, SINRs, and transmit powers of one evaluated mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRates {
    /// Mode the figures below refer to.
    pub mode: Mode,
    /// Chosen uplink transmit power, watts.
    pub p_ul_w: f64,
    /// Chosen downlink transmit power, watts.
    pub p_dl_w: f64,
    /// Uplink SINR at the chosen powers.
    pub sinr_ul: f64,
    /// Downlink SINR at the chosen powers.
    pub sinr_dl: f64,
    /// Truncated uplink rate, bps/Hz.
    pub rate_ul: f64,
    /// Truncated downlink rate, bps/Hz.
    pub rate_dl: f64,
}

impl ModeRates {
    /// Sum of the two directions' rates, bps/Hz.
    pub fn sum_rate(&self) -> f64 {
        self.rate_ul + self.rate_dl
    }

    /// Smaller of the two directions' rates, bps/Hz.
    pub fn min_rate(&self) -> f64 {
        self.rate_ul.min(self.rate_dl)
    }
}

/// Positive root of `a p^2 + b p + c = 0` for `a, b >= 0`, `c <= 0`.
fn positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if a > 0.0 {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        Some((-b + disc.sqrt()) / (2.0 * a))
    } else if b > 0.0 {
        Some(-c / b)
    } else {
        None
    }
}

/// Downlink power on the `p_ul = p_max_ul` edge where the two SINR curves
/// cross, if such a crossing exists inside the edge.
fn edge_a_crossing(mode: Mode, g_i: f64, g_j: f64, h: f64, params: &RateParams) -> Option<f64> {
    let pu = params.p_max_ul_w;
    match mode {
        Mode::FdIn => {
            let denom = pu * h + params.noise_dl_w;
            let slope = g_j / denom;
            if slope <= 0.0 {
                return None;
            }
            positive_root(slope * params.psi_b, slope * params.noise_ul_w, -(pu * g_i))
        }
        Mode::FdSic => {
            let slope = g_j / params.noise_dl_w;
            if slope <= 0.0 {
                return None;
            }
            let q1 =
                positive_root(slope * params.psi_b, slope * params.noise_ul_w, -(pu * g_i));
            let q2 = positive_root(slope * g_j, slope * params.noise_dl_w, -(pu * h));
            match (q1, q2) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            }
        }
        _ => None,
    }
}

/// Uplink power on the `p_dl = p_max_dl` edge where the two SINR curves
/// cross, if such a crossing exists inside the edge.
fn edge_b_crossing(mode: Mode, g_i: f64, g_j: f64, h: f64, params: &RateParams) -> Option<f64> {
    let pd = params.p_max_dl_w;
    match mode {
        Mode::FdIn => {
            let slope = g_i / (pd * params.psi_b + params.noise_ul_w);
            if slope <= 0.0 {
                return None;
            }
            positive_root(slope * h, slope * params.noise_dl_w, -(pd * g_j))
        }
        Mode::FdSic => {
            let s1 = g_i / (pd * params.psi_b + params.noise_ul_w);
            let s2 = h / (pd * g_j + params.noise_dl_w);
            let slope = s1.min(s2);
            if slope <= 0.0 {
                return None;
            }
            Some(pd * g_j / params.noise_dl_w / slope)
        }
        _ => None,
    }
}

/// Max-min fair power allocation of a full-duplex virtual user in `mode`.
///
/// The min-rate objective is maximized on the outer power edges (scaling
/// both powers up never hurts either SINR), so the optimum is one of: the
/// full-power corner, the SINR-balancing crossing on either outer edge, or
/// a single-direction corner in degenerate cases. All candidates are
/// evaluated exactly; ties on min-rate are broken toward the higher
/// sum-rate, then toward the higher downlink power.
pub fn maxmin_power(
    v: VirtualUser,
    mode: Mode,
    ch: &ChannelRealization,
    params: &RateParams,
) -> ModeRates {
    assert!(matches!(mode, Mode::FdIn | Mode::FdSic), "max-min powers apply to FD modes");
    let (i, j) = fd_pair(v);
    let (g_i, g_j, h) = (ch.g_sq[i], ch.g_sq[j], ch.h_sq[i][j]);
    let (pu, pd) = (params.p_max_ul_w, params.p_max_dl_w);

    let mut candidates = [(0.0f64, 0.0f64); 5];
    let mut n_cand = 0;
    let push = |c: &mut [(f64, f64); 5], n: &mut usize, p: (f64, f64)| {
        c[*n] = p;
        *n += 1;
    };
    push(&mut candidates, &mut n_cand, (pu, pd));
    push(&mut candidates, &mut n_cand, (pu, 0.0));
    push(&mut candidates, &mut n_cand, (0.0, pd));
    if let Some(q) = edge_a_crossing(mode, g_i, g_j, h, params) {
        if q.is_finite() && q > 0.0 && q < pd {
            push(&mut candidates, &mut n_cand, (pu, q));
        }
    }
    if let Some(q) = edge_b_crossing(mode, g_i, g_j, h, params) {
        if q.is_finite() && q > 0.0 && q < pu {
            push(&mut candidates, &mut n_cand, (q, pd));
        }
    }

    let mut best: Option<ModeRates> = None;
    for &(p_ul, p_dl) in &candidates[..n_cand] {
        let (su, sd) = mode_sinrs(v, mode, ch, p_ul, p_dl, params);
        let cand = ModeRates {
            mode,
            p_ul_w: p_ul,
            p_dl_w: p_dl,
            sinr_ul: su,
            sinr_dl: sd,
            rate_ul: truncated_rate(su, params.gamma_max),
            rate_dl: truncated_rate(sd, params.gamma_max),
        };
        let better = match &best {
            None => true,
            Some(b) => {
                if cand.min_rate() > b.min_rate() + TIE_EPS {
                    true
                } else if cand.min_rate() < b.min_rate() - TIE_EPS {
                    false
                } else if cand.sum_rate() > b.sum_rate() + TIE_EPS {
                    true
                } else if cand.sum_rate() < b.sum_rate() - TIE_EPS {
                    false
                } else {
                    cand.p_dl_w > b.p_dl_w
                }
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.expect("candidate list is never empty")
}

/// Rates of a half-duplex virtual user at full power in its one direction.
pub fn hd_rates(v: VirtualUser, ch: &ChannelRealization, params: &RateParams) -> ModeRates {
    assert!(!v.is_fd(), "half-duplex rates apply to single-direction virtual users");
    let (mode, p_ul, p_dl) = if v.ul.is_some() {
        (Mode::HdUl, params.p_max_ul_w, 0.0)
    } else {
        (Mode::HdDl, 0.0, params.p_max_dl_w)
    };
    let (su, sd) = mode_sinrs(v, mode, ch, p_ul, p_dl, params);
    ModeRates {
        mode,
        p_ul_w: p_ul,
        p_dl_w: p_dl,
        sinr_ul: su,
        sinr_dl: sd,
        rate_ul: truncated_rate(su, params.gamma_max),
        rate_dl: truncated_rate(sd, params.gamma_max),
    }
}

/// Achievable sum rate of every virtual user in one slot, with the chosen
/// mode and power details retained per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMatrix {
    n: usize,
    utility: Vec<f64>,
    entries: Vec<Option<ModeRates>>,
}

impl PerformanceMatrix {
    /// Builds a matrix from an arbitrary utility function, e.g. for custom
    /// rate models or hand-crafted scheduling scenarios. Entries carry no
    /// mode/power details.
    pub fn from_utilities(n: usize, mut utility_of: impl FnMut(VirtualUser) -> f64) -> Self {
        let mut utility = vec![0.0; (n + 1) * (n + 1)];
        for v in all_virtual_users(n) {
            let (i, j) = v.grid();
            utility[i * (n + 1) + j] = utility_of(v);
        }
        PerformanceMatrix { n, utility, entries: vec![None; (n + 1) * (n + 1)] }
    }

    /// Number of users.
    pub fn n_users(&self) -> usize {
        self.n
    }

    /// Sum rate of the virtual user at grid cell `(i, j)` (0 = idle).
    pub fn utility(&self, i: usize, j: usize) -> f64 {
        assert!(i != j || i != 0, "(0,0) is not a virtual user");
        assert!(i != j, "diagonal grid cells are not virtual users");
        self.utility[i * (self.n + 1) + j]
    }

    /// Sum rate of virtual user `v`.
    pub fn utility_of(&self, v: VirtualUser) -> f64 {
        let (i, j) = v.grid();
        self.utility(i, j)
    }

    /// Mode, powers, and per-direction rates chosen for virtual user `v`.
    pub fn entry_of(&self, v: VirtualUser) -> &ModeRates {
        let (i, j) = v.grid();
        self.entries[i * (self.n + 1) + j]
            .as_ref()
            .expect("valid virtual users always have an entry")
    }
}

/// Evaluates the full performance matrix for one slot: half-duplex entries
/// at full power and full-duplex entries at max-min powers under the best
/// admissible mode (FD-SIC is admissible only when the downlink user can
/// cancel interference; ties prefer FD-IN).
pub fn performance_matrix(
    ch: &ChannelRealization,
    params: &RateParams,
    sic: &SicCapability,
) -> PerformanceMatrix {
    let n = ch.g_sq.len();
    assert_eq!(sic.len(), n, "SIC capability flags must cover every user");
    let mut utility = vec![0.0; (n + 1) * (n + 1)];
    let mut entries = vec![None; (n + 1) * (n + 1)];
    for v in all_virtual_users(n) {
        let chosen = if v.is_fd() {
            let fd_in = maxmin_power(v, Mode::FdIn, ch, params);
            if sic.can_cancel(v.dl.unwrap()) {
                let fd_sic = maxmin_power(v, Mode::FdSic, ch, params);
                if fd_sic.sum_rate() > fd_in.sum_rate() {
                    fd_sic
                } else {
                    fd_in
                }
            } else {
                fd_in
            }
        } else {
            hd_rates(v, ch, params)
        };
        let (i, j) = v.grid();
        utility[i * (n + 1) + j] = chosen.sum_rate();
        entries[i * (n + 1) + j] = Some(chosen);
    }
    PerformanceMatrix { n, utility, entries }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
