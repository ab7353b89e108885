// Kaplan-Meier curve and median survival of a small censored cohort.
//
// cargo run --example kaplan_meier

use survclass::survival::{kaplan_meier_raw, median_survival};

pub fn run_example() -> survclass::Result<()> {
    let times = [3.0, 5.0, 5.0, 8.0, 9.0, 12.0, 15.0, 21.0];
    let events = [true, true, false, true, false, true, true, false];
    let curve = kaplan_meier_raw(&times, &events)?;
    println!("{:>6} {:>8} {:>7} {:>9}", "time", "at_risk", "events", "survival");
    for p in &curve.points {
        println!("{:>6} {:>8} {:>7} {:>9.4}", p.time, p.at_risk, p.events, p.survival);
    }
    println!("S(10) = {:.4}", curve.survival_at(10.0));
    match median_survival(&curve) {
        Some(m) => println!("median survival: {m}"),
        None => println!("median survival: not reached"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
