//! Feasibility checks for temporal demand vectors.
//!
//! Shows the three questions the library answers about a demand vector:
//! 1. Can the lower demands be met in the long run (exact-share test)?
//! 2. If so, what fractional schedule proves it (witness)?
//! 3. Can they be met in *every* window of `s` slots, and by which slot counts?
//!
//! Run with: `cargo run --example feasibility_check`

use fdsched::feasibility::{
    allocate_window_box, feasible_longterm_box, longterm_witness_box, witness_schedule,
    TemporalDemands,
};

fn print_demands(d: &TemporalDemands) {
    println!("  user   lower UL  lower DL  upper UL  upper DL");
    for i in 0..d.n_users() {
        println!(
            "  u{:<5} {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}",
            i, d.lower_ul[i], d.lower_dl[i], d.upper_ul[i], d.upper_dl[i]
        );
    }
}

fn print_fraction_grid(d: &TemporalDemands, schedule: &fdsched::feasibility::FractionalSchedule) {
    let n = d.n_users();
    print!("         DL idle");
    (0..n).for_each(|j| print!("   DL u{j}"));
    println!();
    for i in 0..=n {
        if i == 0 {
            print!("  UL idle");
        } else {
            print!("  UL u{:<3}", i - 1);
        }
        for j in 0..=n {
            if i == j {
                print!("       -");
            } else {
                print!(" {:>7.4}", schedule.fraction(i, j));
            }
        }
        println!();
    }
}

fn main() {
    // Four users with uneven demands: u0 is uplink-heavy, u3 downlink-heavy.
    let demands = TemporalDemands::with_lower(
        vec![0.30, 0.10, 0.10, 0.05],
        vec![0.05, 0.10, 0.10, 0.30],
    );

    println!("== Long-term check ==");
    print_demands(&demands);
    println!("  feasible in the long run: {}", feasible_longterm_box(&demands).expect("valid vector"));

    let witness = longterm_witness_box(&demands).expect("demands are feasible");
    println!("\n  Witness (fraction of slots per virtual user, rows = UL, cols = DL):");
    print_fraction_grid(&demands, &witness);
    print!("  achieved UL shares:");
    (0..demands.n_users()).for_each(|i| print!(" {:.4}", witness.share_ul(i)));
    print!("\n  achieved DL shares:");
    (0..demands.n_users()).for_each(|j| print!(" {:.4}", witness.share_dl(j)));
    println!("\n  total fraction scheduled: {:.6}", witness.total());

    // The same lower demands, packed into a hard 16-slot window.
    let s = 16;
    println!("\n== Window check (every {s} consecutive slots) ==");
    match allocate_window_box(&demands, s).expect("demand vector is valid") {
        Some(alloc) => {
            println!("  slot counts that satisfy every bound:");
            println!("  user   UL slots  DL slots   (of {s})");
            for i in 0..demands.n_users() {
                let ul: u64 = (0..=demands.n_users()).map(|j| alloc.count(i + 1, j)).sum();
                let dl: u64 = (0..=demands.n_users()).map(|j| alloc.count(j, i + 1)).sum();
                println!("  u{i:<5} {ul:>8}  {dl:>8}");
            }
            let order = witness_schedule(&alloc);
            print!("  one concrete slot order:");
            for v in &order {
                print!(" {v}");
            }
            println!("\n  (v(a,b): a serves uplink, b downlink; 0 = idle, k = user k-1)");
        }
        None => println!("  no slot assignment fits in {s} slots"),
    }

    // An overloaded vector: lower demands alone need 1.2 of the uplink.
    let overloaded =
        TemporalDemands::with_lower(vec![0.4, 0.4, 0.4], vec![0.1, 0.1, 0.1]);
    println!("\n== Overloaded vector ==");
    print_demands(&overloaded);
    println!("  feasible in the long run: {}", feasible_longterm_box(&overloaded).expect("valid vector"));
    println!("  witness result: {:?}", longterm_witness_box(&overloaded).err());
}
