//! Release gate: ten end-to-end checks covering the feasibility solvers, the
//! rate model, threshold learning, hard window guarantees, and the paired
//! gain experiments. Each check prints one PASS/FAIL line; the process exits
//! nonzero if any check fails.
//!
//! Run directly with `cargo test --test acceptance` (it also runs as part of
//! `cargo test --workspace`). The full gate takes a few minutes; the heavy
//! checks state their sizes in their messages.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use fdsched::channel::{CellConfig, CellDrop, ChannelParams, ChannelRealization};
use fdsched::feasibility::{
    feasible_longterm, feasible_shortterm, longterm_witness, TemporalDemands,
};
use fdsched::harness::{
    run_gain_sweep, run_shortterm, DemandsConfig, MetricsReport, SicScenario, SimConfig, SweepAxis,
};
use fdsched::rate::{
    maxmin_power, performance_matrix, Mode, PerformanceMatrix, RateParams, SicCapability,
};
use fdsched::scheduler::{
    atbs_feasible_set, meets_window_demands, tbs_select, ScheduleState, ThresholdVector,
};
use fdsched::threshopt::{check_slackness, OptimizerState};
use fdsched::virtual_user::{all_virtual_users, VirtualUser, VirtualUserSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ExitCode {
    // Assertion failures are reported by the runner below; silence the
    // default per-panic stderr noise.
    std::panic::set_hook(Box::new(|_| {}));

    let checks: &[(&str, fn())] = &[
        (
            "1. short-window feasibility matches exhaustive slot enumeration (n<=3, s<=6)",
            check_window_feasibility_enumeration,
        ),
        (
            "2. long-term region matches the four-inequality oracle with exact witnesses (100k vectors)",
            check_longterm_region_and_witnesses,
        ),
        (
            "3. learned cumulative shares meet every lower demand within 0.01 (5 seeds x 4M slots)",
            check_share_convergence,
        ),
        (
            "4. complementary-slackness products vanish relative to the largest threshold",
            check_slackness_products,
        ),
        (
            "5. admissible-set scheduling never misses a window quota (1000 seeded runs, s in {8,80})",
            check_hard_window_guarantee,
        ),
        (
            "6. window-constrained utility approaches the long-term utility as windows grow",
            check_window_utility_convergence,
        ),
        (
            "7. full-duplex gain rises with self-interference attenuation (paired bootstrap >= 95%)",
            check_gain_rises_with_attenuation,
        ),
        (
            "8. user-side cancellation recovers hotspot gains into the expected band",
            check_cancellation_recovers_hotspot_gain,
        ),
        (
            "9. rate matrix matches straight-line recomputation; power solver matches a 201x201 grid",
            check_rate_model_oracles,
        ),
        (
            "10. online learning matches exhaustive threshold search on a two-point rate model",
            check_two_point_threshold_optimality,
        ),
    ];

    let mut failures = 0;
    for (name, f) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("[PASS {secs:6.1}s] {name}"),
            Err(payload) => {
                failures += 1;
                println!("[FAIL {secs:6.1}s] {name}");
                println!("           {}", panic_text(payload.as_ref()));
            }
        }
    }
    if failures == 0 {
        println!("acceptance: all {} checks passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of {} checks FAILED", checks.len());
        ExitCode::FAILURE
    }
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic with non-string payload".to_string()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation / sqrt(k)).
fn std_err(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

// ---------------------------------------------------------------------------
// 1. Window feasibility vs. slot-by-slot enumeration
// ---------------------------------------------------------------------------

/// Activation moves of one slot as mixed-radix digit positions: digits
/// `0..n` count uplink slots per user, digits `n..2n` downlink slots.
fn slot_moves(n: usize) -> Vec<Vec<usize>> {
    let mut moves = Vec::new();
    for i in 0..n {
        moves.push(vec![i]);
    }
    for j in 0..n {
        moves.push(vec![n + j]);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                moves.push(vec![i, n + j]);
            }
        }
    }
    moves
}

/// Dense table over all count vectors with entries in `0..=s`: `table[idx]`
/// is true iff the decoded counts are coverable by exactly `s` slots. Pure
/// dynamic programming over slots; knows nothing about the flow solver.
fn enumerate_coverable(n: usize, s: u64) -> Vec<bool> {
    let radix = (s + 1) as usize;
    let digits = 2 * n;
    let mut pow = vec![1usize; digits + 1];
    for d in 0..digits {
        pow[d + 1] = pow[d] * radix;
    }
    let states = pow[digits];
    let moves = slot_moves(n);

    let mut prev = vec![false; states];
    prev[0] = true;
    for _level in 0..s {
        let mut next = vec![false; states];
        for idx in 0..states {
            for mv in &moves {
                let fits = mv.iter().all(|&d| (idx / pow[d]) % radix >= 1);
                if fits {
                    let from = idx - mv.iter().map(|&d| pow[d]).sum::<usize>();
                    if prev[from] {
                        next[idx] = true;
                        break;
                    }
                }
            }
        }
        prev = next;
    }
    prev
}

fn decode_counts(idx: usize, n: usize, radix: usize) -> (Vec<u64>, Vec<u64>) {
    let mut rem = idx;
    let mut k = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        k.push((rem % radix) as u64);
        rem /= radix;
    }
    (k[..n].to_vec(), k[n..].to_vec())
}

fn check_window_feasibility_enumeration() {
    let start = Instant::now();
    let mut grids = 0u64;
    for n in 1..=3usize {
        for s in 1..=6u64 {
            let radix = (s + 1) as usize;
            let oracle = enumerate_coverable(n, s);
            for (idx, &coverable) in oracle.iter().enumerate() {
                let (k_ul, k_dl) = decode_counts(idx, n, radix);
                let w_ul: Vec<f64> = k_ul.iter().map(|&k| k as f64 / s as f64).collect();
                let w_dl: Vec<f64> = k_dl.iter().map(|&k| k as f64 / s as f64).collect();
                let lib = feasible_shortterm(s, &w_ul, &w_dl)
                    .expect("integral shares are valid")
                    .is_some();
                assert_eq!(
                    lib, coverable,
                    "disagreement at n={n} s={s} k_ul={k_ul:?} k_dl={k_dl:?}"
                );
                grids += 1;
            }
        }
    }
    assert!(grids == 189_633, "expected to visit every integral grid, saw {grids}");
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "enumeration took {secs:.0}s, budget is 120s");
}

// ---------------------------------------------------------------------------
// 2. Long-term region and witnesses
// ---------------------------------------------------------------------------

fn check_longterm_region_and_witnesses() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_002);
    let eps = 1e-9;
    let (mut n_feasible, mut n_infeasible) = (0u64, 0u64);
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=5usize);
        let budgeted = rng.gen_bool(0.5);
        let mut w_ul = vec![0.0f64; n];
        let mut w_dl = vec![0.0f64; n];
        for w in [&mut w_ul, &mut w_dl] {
            let mut remaining = 1.0f64;
            for x in w.iter_mut() {
                *x = if budgeted {
                    let draw = rng.gen::<f64>() * remaining;
                    remaining -= draw;
                    draw
                } else {
                    rng.gen::<f64>()
                };
            }
        }

        // Independent oracle: the four share inequalities, written out.
        let sum_ul: f64 = w_ul.iter().sum();
        let sum_dl: f64 = w_dl.iter().sum();
        let oracle = sum_ul <= 1.0 + eps
            && sum_dl <= 1.0 + eps
            && sum_ul + sum_dl >= 1.0 - eps
            && (0..n).all(|i| w_ul[i] + w_dl[i] <= 1.0 + eps);

        let lib = feasible_longterm(&w_ul, &w_dl);
        assert_eq!(lib, oracle, "region disagreement at w_ul={w_ul:?} w_dl={w_dl:?}");
        if !oracle {
            n_infeasible += 1;
            continue;
        }
        n_feasible += 1;

        let witness = longterm_witness(&w_ul, &w_dl)
            .unwrap_or_else(|e| panic!("witness refused feasible w_ul={w_ul:?} w_dl={w_dl:?}: {e}"));
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                if i == j {
                    continue;
                }
                let f = witness.fraction(i, j);
                assert!(f >= -1e-12, "negative fraction {f} at ({i},{j}) for w_ul={w_ul:?}");
                total += f;
            }
        }
        assert!(
            (total - 1.0).abs() <= 1e-9,
            "witness fractions sum to {total}, not 1, for w_ul={w_ul:?} w_dl={w_dl:?}"
        );
        for i in 0..n {
            assert!(
                (witness.share_ul(i) - w_ul[i]).abs() <= 1e-9
                    && (witness.share_dl(i) - w_dl[i]).abs() <= 1e-9,
                "witness misses the exact shares for user {i}: w_ul={w_ul:?} w_dl={w_dl:?}"
            );
        }
    }
    assert!(
        n_feasible > 10_000 && n_infeasible > 10_000,
        "sampling must exercise both outcomes, saw {n_feasible} feasible / {n_infeasible} infeasible"
    );
}

// ---------------------------------------------------------------------------
// 3 + 4. Long-run learning: share convergence and slackness products
// ---------------------------------------------------------------------------

struct ConvergenceOutcome {
    seed: u64,
    share_ul: Vec<f64>,
    share_dl: Vec<f64>,
    product_ul: Vec<f64>,
    product_dl: Vec<f64>,
    max_abs_threshold: f64,
}

/// Five independent drops, each learned for 4M slots with step size 0.001
/// under lower demands (2/16 uplink, 3/16 downlink per user). Shared between
/// checks 3 and 4; computed once.
fn convergence_outcomes() -> &'static [ConvergenceOutcome] {
    static RUNS: OnceLock<Result<Vec<ConvergenceOutcome>, String>> = OnceLock::new();
    let result = RUNS.get_or_init(|| {
        catch_unwind(run_convergence_experiment).map_err(|p| panic_text(p.as_ref()))
    });
    match result {
        Ok(v) => v,
        Err(msg) => panic!("learning experiment failed: {msg}"),
    }
}

fn run_convergence_experiment() -> Vec<ConvergenceOutcome> {
    let demands = TemporalDemands::with_lower(vec![2.0 / 16.0; 4], vec![3.0 / 16.0; 4]);
    let cell = CellConfig { n_users: 4, ..CellConfig::default() };
    let ch = ChannelParams::default();
    let sic = SicCapability::none(4);
    (1..=5u64)
        .map(|seed| {
            let drop = CellDrop::generate(&cell, &ch, seed).expect("valid configuration");
            let params = RateParams::new(&ch, &drop);
            let mut state = OptimizerState::new(4, 0.001);
            for slot in 0..4_000_000u64 {
                let r = drop.draw_realization(seed, slot);
                let pm = performance_matrix(&r, &params, &sic);
                state.step(&pm, &demands);
            }
            let report = check_slackness(&state, &demands, 0.05);
            ConvergenceOutcome {
                seed,
                share_ul: state.share_ul().to_vec(),
                share_dl: state.share_dl().to_vec(),
                product_ul: report.product_ul,
                product_dl: report.product_dl,
                max_abs_threshold: report.max_abs_threshold,
            }
        })
        .collect()
}

fn check_share_convergence() {
    for run in convergence_outcomes() {
        for i in 0..4 {
            assert!(
                run.share_ul[i] >= 2.0 / 16.0 - 0.01,
                "seed {}: uplink share of user {i} is {:.4}, demand 2/16",
                run.seed,
                run.share_ul[i]
            );
            assert!(
                run.share_dl[i] >= 3.0 / 16.0 - 0.01,
                "seed {}: downlink share of user {i} is {:.4}, demand 3/16",
                run.seed,
                run.share_dl[i]
            );
        }
    }
}

fn check_slackness_products() {
    for run in convergence_outcomes() {
        let bound = 0.05 * run.max_abs_threshold + 1e-12;
        for i in 0..4 {
            assert!(
                run.product_ul[i] < bound && run.product_dl[i] < bound,
                "seed {}: slackness products ({:.4}, {:.4}) for user {i} exceed {bound:.4}",
                run.seed,
                run.product_ul[i],
                run.product_dl[i]
            );
        }
    }
}

// ---------------------------------------------------------------------------
// 5. Hard per-window guarantee, absolute
// ---------------------------------------------------------------------------

fn check_hard_window_guarantee() {
    let demands = TemporalDemands::with_lower(vec![0.125; 4], vec![0.125; 4]);
    let cell = CellConfig { n_users: 4, ..CellConfig::default() };
    let ch = ChannelParams::default();
    let drop = CellDrop::generate(&cell, &ch, 909).expect("valid configuration");
    let params = RateParams::new(&ch, &drop);
    let sic = SicCapability::none(4);

    // Learn thresholds for this drop, then freeze them.
    let mut opt = OptimizerState::new(4, 0.001);
    for slot in 0..300_000u64 {
        let r = drop.draw_realization(909, slot);
        let pm = performance_matrix(&r, &params, &sic);
        opt.step(&pm, &demands);
    }
    let th = opt.thresholds().clone();

    let mut windows_checked = [0u64, 0];
    for run in 0..1000u64 {
        for (si, &s) in [8u64, 80].iter().enumerate() {
            let stream = 50_000 + run * 2 + si as u64;
            let mut slot = 0u64;
            for _ in 0..10 {
                let mut state = ScheduleState::new(4);
                for _ in 0..s {
                    let r = drop.draw_realization(stream, slot);
                    slot += 1;
                    let pm = performance_matrix(&r, &params, &sic);
                    let admissible = atbs_feasible_set(&state, &demands, s);
                    assert!(
                        !admissible.is_empty(),
                        "run {run} s={s} t={}: admissible set must never empty out",
                        state.t
                    );
                    let v = tbs_select(&pm, &th, &admissible).expect("nonempty candidate set");
                    state.apply(v, pm.utility_of(v));
                }
                let quota = s / 8; // = ceil(s/8) since 8 divides s
                for u in 0..4 {
                    assert!(
                        state.count_ul(u) >= quota && state.count_dl(u) >= quota,
                        "run {run} s={s}: user {u} got ({}, {}) slots of the {quota} owed",
                        state.count_ul(u),
                        state.count_dl(u)
                    );
                }
                assert!(meets_window_demands(&state, &demands, s));
                windows_checked[si] += 1;
            }
        }
    }
    assert_eq!(windows_checked, [10_000, 10_000]);
}

// ---------------------------------------------------------------------------
// 6. Window-constrained utility vs. the long-term learning run
// ---------------------------------------------------------------------------

/// Final cumulative utilities per drop for one (cell, scheduler, window).
fn finals_by(report: &MetricsReport, cell: &str, scheduler: &str, window: u64) -> Vec<f64> {
    let mut rows: Vec<(u64, f64)> = report
        .records
        .iter()
        .filter(|r| r.is_final && r.cell == cell && r.scheduler == scheduler && r.window == window)
        .map(|r| (r.drop_index, r.mean_utility_bps_hz))
        .collect();
    rows.sort_by_key(|&(k, _)| k);
    rows.into_iter().map(|(_, u)| u).collect()
}

fn check_window_utility_convergence() {
    let windows = [8u64, 80, 800, 8000];
    let mut cfg = SimConfig::with_demands(DemandsConfig::uniform_lower(4, 0.125));
    cfg.master_seed = 606;
    cfg.run.n_drops = 5;
    cfg.run.n_slots = 1_000_000;
    cfg.run.scenario = SicScenario::AllSic;
    let report = run_shortterm(&cfg, &windows).unwrap_or_else(|e| panic!("driver failed: {e}"));

    // The long-term reference is the learning run's own cumulative utility.
    // The frozen-snapshot run is not a valid stand-in: truncation makes exact
    // utility ties common, a deterministic tie-break sends every tied slot
    // the same way, and a single threshold snapshot can then starve a
    // user-direction outright — a demand-violating policy whose utility
    // overstates what long-term-fair scheduling can achieve.
    let reference_by_drop = finals_by(&report, "base", "tbs_learn", 0);
    assert_eq!(reference_by_drop.len(), 5, "one learning run per drop");
    let reference = mean(&reference_by_drop);
    let allowance = std_err(&reference_by_drop);

    let mut mean_by_window = HashMap::new();
    for &s in &windows {
        let atbs = finals_by(&report, "base", "atbs", s);
        assert_eq!(atbs.len(), 5, "one window-{s} run per drop");
        let at_s = mean(&atbs);
        assert!(
            at_s <= reference + allowance + 1e-12,
            "window {s}: constrained utility {at_s:.4} exceeds the long-term \
             reference {reference:.4} by more than one standard error {allowance:.4}"
        );
        let summary = report.summary("base", "atbs", s).expect("summary row");
        assert_eq!(summary.window_violations, 0, "window {s} must never miss a quota");
        mean_by_window.insert(s, at_s);
    }
    let at_8000 = mean_by_window[&8000];
    let at_8 = mean_by_window[&8];
    assert!(
        at_8000 >= 0.98 * reference,
        "window 8000 keeps {:.2}% of the long-term utility, needs 98%",
        100.0 * at_8000 / reference
    );
    assert!(
        at_8000 > at_8,
        "utility must grow with the window: s=8000 gives {at_8000:.4}, s=8 gives {at_8:.4}"
    );
}

// ---------------------------------------------------------------------------
// 7. Gain vs. self-interference attenuation, paired bootstrap
// ---------------------------------------------------------------------------

fn check_gain_rises_with_attenuation() {
    let mut cfg = SimConfig::with_demands(DemandsConfig::uniform_lower(4, 0.125));
    cfg.master_seed = 707;
    cfg.run.n_drops = 20;
    cfg.run.n_slots = 100_000;
    let report =
        run_gain_sweep(&cfg, SweepAxis::Sim).unwrap_or_else(|e| panic!("sweep failed: {e}"));

    let cells = ["sim=60", "sim=80", "sim=100"];
    let tbs: Vec<Vec<f64>> = cells.iter().map(|c| finals_by(&report, c, "tbs", 0)).collect();
    let hd: Vec<Vec<f64>> = cells.iter().map(|c| finals_by(&report, c, "hd", 0)).collect();
    for k in 0..3 {
        assert_eq!(tbs[k].len(), 20, "20 drops per cell");
        assert_eq!(hd[k].len(), 20);
    }
    // Gain as ratio of drop-mean utilities over a common drop index multiset
    // (drops are generated from the same master seed in every cell, so the
    // comparison is paired).
    let gains = |idx: &[usize]| -> [f64; 3] {
        let mut g = [0.0; 3];
        for k in 0..3 {
            let (mut a, mut b) = (0.0, 0.0);
            for &i in idx {
                a += tbs[k][i];
                b += hd[k][i];
            }
            g[k] = 100.0 * (a / b - 1.0);
        }
        g
    };

    let all: Vec<usize> = (0..20).collect();
    let point = gains(&all);
    assert!(
        point[0] > 0.0 && point[0] < point[1] && point[1] < point[2],
        "point gains must rise strictly: {point:?}"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(70_707);
    let trials = 2000;
    let mut ordered = 0;
    for _ in 0..trials {
        let idx: Vec<usize> = (0..20).map(|_| rng.gen_range(0..20)).collect();
        let g = gains(&idx);
        if g[0] > 0.0 && g[0] < g[1] && g[1] < g[2] {
            ordered += 1;
        }
    }
    let confidence = ordered as f64 / trials as f64;
    assert!(
        confidence >= 0.95,
        "only {:.1}% of bootstrap resamples keep the strict ordering (gains {point:?})",
        100.0 * confidence
    );
}

// ---------------------------------------------------------------------------
// 8. Hotspot placements with and without user-side cancellation
// ---------------------------------------------------------------------------

fn check_cancellation_recovers_hotspot_gain() {
    let mut cfg = SimConfig::with_demands(DemandsConfig::uniform_lower(4, 0.125));
    cfg.master_seed = 808;
    cfg.run.n_drops = 20;
    cfg.run.n_slots = 100_000;
    let report = run_gain_sweep(&cfg, SweepAxis::Placement)
        .unwrap_or_else(|e| panic!("sweep failed: {e}"));

    let gain = |cell: &str| -> f64 {
        report
            .summary(cell, "tbs", 0)
            .unwrap_or_else(|| panic!("missing summary for {cell}"))
            .gain_percent_vs_hd
            .expect("gain against the half-duplex baseline")
    };
    let one_hotspot_sic = gain("hotspot1/all_sic");
    let one_hotspot = gain("hotspot1/no_sic");
    let two_hotspots = gain("hotspot2/no_sic");
    assert!(
        (70.0..=120.0).contains(&one_hotspot_sic),
        "single-hotspot gain with cancellation is {one_hotspot_sic:.1}%, outside [70%, 120%]"
    );
    assert!(
        one_hotspot_sic > one_hotspot,
        "cancellation must lift the single-hotspot gain: {one_hotspot_sic:.1}% vs {one_hotspot:.1}%"
    );
    assert!(
        two_hotspots > one_hotspot,
        "a second hotspot must lift the no-cancellation gain: {two_hotspots:.1}% vs {one_hotspot:.1}%"
    );
}

// ---------------------------------------------------------------------------
// 9. Rate-model oracles
// ---------------------------------------------------------------------------

/// Straight-line truncated rate, independent of the library.
fn straight_rate(sinr: f64, cap: f64) -> f64 {
    let r = (1.0 + sinr).log2();
    if r > cap {
        cap
    } else {
        r
    }
}

/// Straight-line per-mode SINR pair for (uplink user i, downlink user j).
fn straight_sinrs(
    mode: Mode,
    g_i: f64,
    g_j: f64,
    h: f64,
    p_ul: f64,
    p_dl: f64,
    p: &RateParams,
) -> (f64, f64) {
    match mode {
        Mode::HdUl => (p_ul * g_i / p.noise_ul_w, 0.0),
        Mode::HdDl => (0.0, p_dl * g_j / p.noise_dl_w),
        Mode::FdIn => (
            p_ul * g_i / (p_dl * p.psi_b + p.noise_ul_w),
            p_dl * g_j / (p_ul * h + p.noise_dl_w),
        ),
        Mode::FdSic => {
            let at_bs = p_ul * g_i / (p_dl * p.psi_b + p.noise_ul_w);
            let at_user = p_ul * h / (p_dl * g_j + p.noise_dl_w);
            (if at_bs < at_user { at_bs } else { at_user }, p_dl * g_j / p.noise_dl_w)
        }
    }
}

fn check_rate_model_oracles() {
    // Matrix identity on 1000 random realizations for each n, both with and
    // without cancellation capability.
    let ch = ChannelParams::default();
    for n in [2usize, 3] {
        let cell = CellConfig { n_users: n, ..CellConfig::default() };
        let mut realizations = 0;
        for seed in 0..10u64 {
            let drop = CellDrop::generate(&cell, &ch, seed).expect("valid configuration");
            let params = RateParams::new(&ch, &drop);
            for slot in 0..100u64 {
                let r = drop.draw_realization(seed + 4000, slot);
                realizations += 1;
                for sic in [SicCapability::none(n), SicCapability::all(n)] {
                    let pm = performance_matrix(&r, &params, &sic);
                    for v in all_virtual_users(n) {
                        let e = pm.entry_of(v);
                        let (i, j) = (v.ul.unwrap_or(0), v.dl.unwrap_or(0));
                        let h = if v.is_fd() { r.h_sq[i][j] } else { 0.0 };
                        let (su, sd) =
                            straight_sinrs(e.mode, r.g_sq[i], r.g_sq[j], h, e.p_ul_w, e.p_dl_w, &params);
                        let straight =
                            straight_rate(su, params.gamma_max) + straight_rate(sd, params.gamma_max);
                        let util = pm.utility_of(v);
                        assert!(
                            (util - straight).abs() <= 1e-12 * (1.0 + util.abs()),
                            "n={n} seed={seed} slot={slot} {v}: {util} vs straight-line {straight}"
                        );
                    }
                }
            }
        }
        assert_eq!(realizations, 1000);
    }

    // Closed-form max-min power vs. a zoomed numerical grid on 100 instances
    // drawn from independent cell drops. Every evaluated grid point is a
    // feasible power pair, so an exact solver must weakly dominate the grid
    // optimum. For the upper bound, a single uniform grid is too coarse
    // (optima can sit at tiny downlink powers), so each stage re-grids a
    // 201x201 lattice inside one step around the previous best point; four
    // stages resolve the optimum to within 0.1%.
    let cell = CellConfig { n_users: 2, ..CellConfig::default() };
    let mut instances: Vec<(f64, f64, f64, RateParams)> = Vec::new();
    for seed in 0..100u64 {
        let drop = CellDrop::generate(&cell, &ch, seed).expect("valid configuration");
        let r = drop.draw_realization(seed, 0);
        instances.push((r.g_sq[0], r.g_sq[1], r.h_sq[0][1], RateParams::new(&ch, &drop)));
    }

    for (k, (g_i, g_j, h, params)) in instances.into_iter().enumerate() {
        let r = ChannelRealization { g_sq: vec![g_i, g_j], h_sq: vec![vec![0.0, h], vec![h, 0.0]] };
        for mode in [Mode::FdIn, Mode::FdSic] {
            let (box_u, box_d) = (params.p_max_ul_w, params.p_max_dl_w);
            let (mut width_u, mut width_d) = (box_u, box_d);
            let mut center = (box_u / 2.0, box_d / 2.0);
            let mut grid_best = 0.0f64;
            for _stage in 0..40 {
                let lo_u = (center.0 - width_u / 2.0).max(0.0);
                let hi_u = (center.0 + width_u / 2.0).min(box_u);
                let lo_d = (center.1 - width_d / 2.0).max(0.0);
                let hi_d = (center.1 + width_d / 2.0).min(box_d);
                let (mut best_a, mut best_b) = (0usize, 0usize);
                let mut stage_best = f64::NEG_INFINITY;
                for a in 0..=200usize {
                    let p_ul = lo_u + (hi_u - lo_u) * a as f64 / 200.0;
                    for b in 0..=200usize {
                        let p_dl = lo_d + (hi_d - lo_d) * b as f64 / 200.0;
                        let (su, sd) = straight_sinrs(mode, g_i, g_j, h, p_ul, p_dl, &params);
                        let m = straight_rate(su, params.gamma_max)
                            .min(straight_rate(sd, params.gamma_max));
                        if m > stage_best {
                            stage_best = m;
                            best_a = a;
                            best_b = b;
                        }
                    }
                }
                grid_best = grid_best.max(stage_best);
                let step_u = (hi_u - lo_u) / 200.0;
                let step_d = (hi_d - lo_d) / 200.0;
                center = (lo_u + step_u * best_a as f64, lo_d + step_d * best_b as f64);
                // A best point on a window edge that is not the power-box
                // boundary means the basin continues outside: translate the
                // window without shrinking. Otherwise zoom in.
                let stalled = (best_a == 0 && lo_u > 0.0)
                    || (best_a == 200 && hi_u < box_u)
                    || (best_b == 0 && lo_d > 0.0)
                    || (best_b == 200 && hi_d < box_d);
                if !stalled {
                    width_u = 2.0 * step_u;
                    width_d = 2.0 * step_d;
                    if width_u <= 1e-9 * box_u && width_d <= 1e-9 * box_d {
                        break;
                    }
                }
            }
            // Fine one-dimensional sweeps along the two maximum-power edges,
            // log-spaced and linear. Raising both powers together raises both
            // rates until a power bound or the truncation cap binds, so the
            // optimum always touches a box edge or a flat capped region; the
            // sweeps resolve edge optima down to tiny powers that any uniform
            // two-dimensional grid misses.
            let sweep = |fixed_ul: bool| -> f64 {
                let mut best = 0.0f64;
                for t in 0..=50_000usize {
                    let frac_log = 1e-9f64.powf(1.0 - t as f64 / 50_000.0);
                    let frac_lin = t as f64 / 50_000.0;
                    for frac in [frac_log, frac_lin] {
                        let (p_ul, p_dl) =
                            if fixed_ul { (box_u, frac * box_d) } else { (frac * box_u, box_d) };
                        let (su, sd) = straight_sinrs(mode, g_i, g_j, h, p_ul, p_dl, &params);
                        let m = straight_rate(su, params.gamma_max)
                            .min(straight_rate(sd, params.gamma_max));
                        if m > best {
                            best = m;
                        }
                    }
                }
                best
            };
            grid_best = grid_best.max(sweep(true)).max(sweep(false));

            let solved = maxmin_power(VirtualUser::fd(0, 1), mode, &r, &params);
            let lib = solved.min_rate();
            assert!(
                lib >= grid_best - 1e-12 * (1.0 + grid_best),
                "instance {k} {mode:?}: solver {lib} falls below the grid optimum {grid_best}"
            );
            assert!(
                lib <= 1.01 * grid_best + 1e-12,
                "instance {k} {mode:?}: solver {lib} exceeds the grid optimum {grid_best} by >1%"
            );
            // The reported optimum must also be exactly what the reported
            // powers produce.
            let (su, sd) =
                straight_sinrs(mode, g_i, g_j, h, solved.p_ul_w, solved.p_dl_w, &params);
            let direct =
                straight_rate(su, params.gamma_max).min(straight_rate(sd, params.gamma_max));
            assert!(
                (lib - direct).abs() <= 1e-12 * (1.0 + direct),
                "instance {k} {mode:?}: reported {lib} differs from recomputed {direct}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// 10. Two-point rate model: learning vs. exhaustive threshold search
// ---------------------------------------------------------------------------

fn check_two_point_threshold_optimality() {
    // Two fixed rate matrices drawn with probabilities 0.7 / 0.3. The pair
    // (uplink 0, downlink 1) is the greedy pick under both, so the uplink
    // demand of user 1 can only be met by sometimes switching to the swapped
    // pair — a genuinely binding threshold problem with a known structure.
    let a = PerformanceMatrix::from_utilities(2, |v| match (v.ul, v.dl) {
        (Some(0), None) => 4.0,
        (Some(1), None) => 3.0,
        (None, Some(0)) => 3.5,
        (None, Some(1)) => 2.5,
        (Some(0), Some(1)) => 10.0,
        (Some(1), Some(0)) => 9.0,
        _ => unreachable!("n=2 has exactly six virtual users"),
    });
    let b = PerformanceMatrix::from_utilities(2, |v| match (v.ul, v.dl) {
        (Some(0), None) => 3.0,
        (Some(1), None) => 4.0,
        (None, Some(0)) => 2.5,
        (None, Some(1)) => 3.5,
        (Some(0), Some(1)) => 10.0,
        (Some(1), Some(0)) => 9.8,
        _ => unreachable!("n=2 has exactly six virtual users"),
    });
    let p_a = 0.7;
    let demands = TemporalDemands::with_lower(vec![0.65, 0.10], vec![0.0, 0.0]);
    let candidates = VirtualUserSet::full(2);

    // Exact evaluation of a frozen threshold vector over the two-point
    // distribution: expected utility and expected shares.
    let evaluate = |th: &ThresholdVector| -> (f64, [f64; 2], [f64; 2]) {
        let mut utility = 0.0;
        let mut share_ul = [0.0; 2];
        let mut share_dl = [0.0; 2];
        for (pm, p) in [(&a, p_a), (&b, 1.0 - p_a)] {
            let v = tbs_select(pm, th, &candidates).expect("full candidate set");
            utility += p * pm.utility_of(v);
            if let Some(i) = v.ul {
                share_ul[i] += p;
            }
            if let Some(j) = v.dl {
                share_dl[j] += p;
            }
        }
        (utility, share_ul, share_dl)
    };

    // Exhaustive grid over all four thresholds.
    let steps: Vec<f64> = (0..=15).map(|k| k as f64 * 0.2).collect();
    let mut grid_best: Option<f64> = None;
    for &l_ul0 in &steps {
        for &l_ul1 in &steps {
            for &l_dl0 in &steps {
                for &l_dl1 in &steps {
                    let th = ThresholdVector::new(vec![l_ul0, l_ul1], vec![l_dl0, l_dl1]);
                    let (utility, share_ul, _share_dl) = evaluate(&th);
                    let feasible = share_ul[0] >= demands.lower_ul[0] - 1e-9
                        && share_ul[1] >= demands.lower_ul[1] - 1e-9;
                    if feasible && grid_best.map_or(true, |u| utility > u) {
                        grid_best = Some(utility);
                    }
                }
            }
        }
    }
    let grid_best = grid_best.expect("some grid thresholds meet the demands");

    // Online learning on a seeded stream of the same two-point distribution.
    // The thresholds climb from zero at a rate bounded by the step size, so
    // the horizon is long enough for the startup transient (roughly the first
    // hundred thousand slots) to wash out of the cumulative averages.
    let mut rng = ChaCha8Rng::seed_from_u64(101_010);
    let mut opt = OptimizerState::new(2, 0.001);
    let mut schedule = ScheduleState::new(2);
    for _ in 0..10_000_000u64 {
        let pm = if rng.gen_bool(p_a) { &a } else { &b };
        let v = opt.step(pm, &demands);
        schedule.apply(v, pm.utility_of(v));
    }
    for i in 0..2 {
        assert!(
            opt.share_ul()[i] >= demands.lower_ul[i] - 0.01,
            "learned uplink share of user {i} is {:.4}, demand {:.2}",
            opt.share_ul()[i],
            demands.lower_ul[i]
        );
    }
    let learned = schedule.mean_utility();
    assert!(
        (learned - grid_best).abs() <= 0.02 * grid_best,
        "learned utility {learned:.4} vs exhaustive-search optimum {grid_best:.4} (>2% apart)"
    );
}
