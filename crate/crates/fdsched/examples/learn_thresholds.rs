//! Online threshold learning on a single cell drop.
//!
//! Runs the stochastic threshold update for a four-user cell with asymmetric
//! lower demands, printing the thresholds and cumulative shares as they
//! evolve, then checks the complementary-slackness products that certify the
//! learned operating point: a positive threshold must pair with a share that
//! sits exactly on its demand, and an over-served user must carry a zero
//! threshold.
//!
//! Run with: `cargo run --example learn_thresholds` (a few seconds)

use fdsched::channel::{CellConfig, CellDrop, ChannelParams};
use fdsched::feasibility::{feasible_longterm, TemporalDemands};
use fdsched::rate::{performance_matrix, RateParams, SicCapability};
use fdsched::threshopt::{check_slackness, OptimizerState};

const N_SLOTS: u64 = 1_000_000;
const PRINT_EVERY: u64 = 100_000;

fn print_state(state: &OptimizerState) {
    let th = state.thresholds();
    print!("  t={:>6}  thresholds UL", state.t());
    th.ul().iter().for_each(|x| print!(" {x:>6.3}"));
    print!("  DL");
    th.dl().iter().for_each(|x| print!(" {x:>6.3}"));
    print!("  shares UL");
    state.share_ul().iter().for_each(|x| print!(" {x:.3}"));
    print!("  DL");
    state.share_dl().iter().for_each(|x| print!(" {x:.3}"));
    println!();
}

fn main() {
    let demands = TemporalDemands::with_lower(
        vec![2.0 / 16.0; 4],
        vec![3.0 / 16.0; 4],
    );
    assert!(
        feasible_longterm(&demands.lower_ul, &demands.lower_dl),
        "demands must be long-term feasible"
    );

    let cell = CellConfig { n_users: 4, ..CellConfig::default() };
    let channel = ChannelParams::default();
    let drop = CellDrop::generate(&cell, &channel, 7).expect("valid configuration");
    let params = RateParams::new(&channel, &drop);
    let sic = SicCapability::none(drop.n);

    println!("== Learning run: {N_SLOTS} slots, step size 0.001 ==");
    println!("  lower demands: UL 2/16, DL 3/16 per user\n");

    let mut state = OptimizerState::new(drop.n, 0.001);
    for slot in 0..N_SLOTS {
        let realization = drop.draw_realization(7, slot);
        let pm = performance_matrix(&realization, &params, &sic);
        state.step(&pm, &demands);
        if (slot + 1) % PRINT_EVERY == 0 {
            print_state(&state);
        }
    }

    println!("\n== Complementary slackness at t = {N_SLOTS} ==");
    let report = check_slackness(&state, &demands, 0.05);
    println!("  user   thr*(share-demand) UL  thr*(share-demand) DL");
    for i in 0..drop.n {
        println!(
            "  u{:<5} {:>20.5}  {:>20.5}",
            i, report.product_ul[i], report.product_dl[i]
        );
    }
    println!("  largest |threshold|: {:.4}", report.max_abs_threshold);
    println!("  worst shortfall below demand: UL {:.5}, DL {:.5}",
        report.shortfall_ul.iter().cloned().fold(0.0, f64::max),
        report.shortfall_dl.iter().cloned().fold(0.0, f64::max));
    println!("  converged within 5% tolerance: {}", report.converged);
}
