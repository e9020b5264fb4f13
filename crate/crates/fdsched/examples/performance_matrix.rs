//! Per-slot performance matrix for one cell drop.
//!
//! Generates a three-user drop, draws one fading realization, and prints the
//! chosen duplexing mode, transmit powers, and rates for every virtual user —
//! once without self-interference cancellation at the users and once with it
//! everywhere — to show where full-duplex pairing pays off.
//!
//! Run with: `cargo run --example performance_matrix`

use fdsched::channel::{watts_to_dbm, CellConfig, CellDrop, ChannelParams};
use fdsched::rate::{performance_matrix, PerformanceMatrix, RateParams, SicCapability};
use fdsched::virtual_user::all_virtual_users;

fn print_matrix(pm: &PerformanceMatrix) {
    println!("  virtual user  mode    P_ul dBm  P_dl dBm  rate UL  rate DL  sum bps/Hz");
    for v in all_virtual_users(pm.n_users()) {
        let e = pm.entry_of(v);
        println!(
            "  {:<12}  {:<6}  {:>8.2}  {:>8.2}  {:>7.3}  {:>7.3}  {:>10.3}",
            v.to_string(),
            format!("{:?}", e.mode),
            watts_to_dbm(e.p_ul_w),
            watts_to_dbm(e.p_dl_w),
            e.rate_ul,
            e.rate_dl,
            e.sum_rate(),
        );
    }
}

fn best(pm: &PerformanceMatrix) -> (fdsched::virtual_user::VirtualUser, f64) {
    all_virtual_users(pm.n_users())
        .into_iter()
        .map(|v| (v, pm.utility_of(v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one virtual user")
}

fn main() {
    let cell = CellConfig { n_users: 3, ..CellConfig::default() };
    let channel = ChannelParams::default();
    let drop = CellDrop::generate(&cell, &channel, 42).expect("valid configuration");

    println!("== Drop (seed 42) ==");
    println!("  base-station self-interference attenuation: {} dB", channel.sim_db);
    println!("  calibrated P_max: UL {:.2} dBm, DL {:.2} dBm",
        watts_to_dbm(drop.p_max_ul_w), watts_to_dbm(drop.p_max_dl_w));
    println!("  user   position (m)        BS distance  line of sight  pathloss dB");
    for i in 0..drop.n {
        println!(
            "  u{:<4}  ({:>7.2}, {:>7.2})  {:>10.2}  {:<13}  {:>10.2}",
            i,
            drop.positions[i][0],
            drop.positions[i][1],
            drop.bs_distance(i),
            drop.bs_los[i],
            drop.bs_pathloss_db[i],
        );
    }

    let realization = drop.draw_realization(42, 0);
    let params = RateParams::new(&channel, &drop);

    println!("\n== Matrix without user-side cancellation ==");
    let pm_plain = performance_matrix(&realization, &params, &SicCapability::none(drop.n));
    print_matrix(&pm_plain);
    let (v_plain, u_plain) = best(&pm_plain);
    println!("  best virtual user: {v_plain} at {u_plain:.3} bps/Hz");

    println!("\n== Matrix with cancellation at every user ==");
    let pm_sic = performance_matrix(&realization, &params, &SicCapability::all(drop.n));
    print_matrix(&pm_sic);
    let (v_sic, u_sic) = best(&pm_sic);
    println!("  best virtual user: {v_sic} at {u_sic:.3} bps/Hz");

    println!("\n== Effect of cancellation on each full-duplex pair ==");
    for v in all_virtual_users(drop.n).into_iter().filter(|v| v.is_fd()) {
        let before = pm_plain.utility_of(v);
        let after = pm_sic.utility_of(v);
        println!(
            "  {v}: {before:.3} -> {after:.3} bps/Hz ({:+.1}%)",
            100.0 * (after - before) / before
        );
    }
}
