// All five pipelines over repeated splits of a synthetic cohort, summarised
// as mean ± std test c-index.
//
// cargo run --release --example experiment -- [repeats] [workers]

use survclass::harness::{generate_synthetic, run_experiment, PipelineKind, PipelineSpec, SplitPlan, SyntheticSpec};

pub fn run_with(repeats: usize, workers: usize) -> survclass::Result<()> {
    let cohort = generate_synthetic(&SyntheticSpec::default())?;
    let plan = SplitPlan {
        n_repeats: repeats,
        ..SplitPlan::default()
    };
    let specs: Vec<PipelineSpec> = PipelineKind::ALL.iter().map(|&k| PipelineSpec::new(k)).collect();
    let exp = run_experiment(&cohort, &plan, &specs, workers)?;
    println!("{} subjects, {} events, {} splits", exp.n_subjects, exp.n_events, repeats);
    print!("{}", exp.summary.render_text());
    Ok(())
}

pub fn run_example() -> survclass::Result<()> {
    run_with(2, 2)
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    let mut args = std::env::args().skip(1);
    let repeats = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let workers = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    run_with(repeats, workers)
}
