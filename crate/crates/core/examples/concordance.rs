// Harrell's c-index: a perfect ranking, its reverse, and ties.
//
// cargo run --example concordance

use survclass::survival::concordance_index_raw;

pub fn run_example() -> survclass::Result<()> {
    let times = [2.0, 4.0, 6.0, 8.0, 10.0];
    let events = [true, true, false, true, false];
    // Higher score = higher risk = expected to fail earlier.
    let cases: [(&str, [f64; 5]); 3] = [
        ("perfect", [5.0, 4.0, 3.0, 2.0, 1.0]),
        ("reversed", [1.0, 2.0, 3.0, 4.0, 5.0]),
        ("all tied", [1.0; 5]),
    ];
    for (label, scores) in cases {
        let c = concordance_index_raw(&scores, &times, &events)?;
        println!(
            "{label:>9}: c = {:.3} ({} of {} comparable pairs concordant)",
            c.value()?,
            c.concordant,
            c.comparable
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
