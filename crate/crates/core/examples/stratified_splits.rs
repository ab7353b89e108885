// Repeated 60/15/25 splits stratified on the event indicator.
//
// cargo run --example stratified_splits

use survclass::harness::{generate_synthetic, stratified_split, SplitPlan, SyntheticSpec};

pub fn run_example() -> survclass::Result<()> {
    let cohort = generate_synthetic(&SyntheticSpec {
        n: 203,
        seed: 3,
        ..SyntheticSpec::default()
    })?;
    let events = cohort.events();
    let rate = cohort.n_events() as f64 / cohort.len() as f64;
    println!("{} subjects, event rate {:.3}", cohort.len(), rate);
    let plan = SplitPlan {
        n_repeats: 5,
        master_seed: 42,
        ..SplitPlan::default()
    };
    for repeat in 0..plan.n_repeats {
        let part = stratified_split(&cohort, &plan, repeat)?;
        let line: Vec<String> = part
            .parts()
            .iter()
            .map(|p| {
                let e = p.iter().filter(|&&i| events[i]).count();
                format!("{:>3} subjects / {:>3} events (ideal {:.1})", p.len(), e, rate * p.len() as f64)
            })
            .collect();
        println!("repeat {repeat}: {}", line.join(" | "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
