// Newton-Raphson Cox fit on synthetic data with known coefficients.
//
// cargo run --release --example cox_fit

use survclass::cox::{fit, FitConfig};
use survclass::harness::{generate_synthetic, true_scores, SyntheticSpec};
use survclass::survival::concordance_index;

pub fn run_example() -> survclass::Result<()> {
    let spec = SyntheticSpec {
        n: 600,
        beta_true: vec![1.0, -0.5],
        noise_features: 2,
        seed: 11,
        ..SyntheticSpec::default()
    };
    let cohort = generate_synthetic(&spec)?;
    let model = fit(&cohort, &FitConfig::default())?.with_baseline(&cohort)?;
    println!(
        "{} subjects, {} events; converged = {} after {} iterations",
        cohort.len(),
        cohort.n_events(),
        model.converged,
        model.iterations
    );
    for (k, name) in model.feature_names.iter().enumerate() {
        let truth = spec.beta_true.get(k).copied().unwrap_or(0.0);
        println!("{name:>8}: beta = {:+.3} (true {truth:+.1})", model.beta[k]);
    }
    let fitted = concordance_index(&model.hazard_scores(&cohort)?, &cohort)?;
    let oracle = concordance_index(&true_scores(&spec, &cohort), &cohort)?;
    println!("c-index: fitted {fitted:.4}, true linear predictor {oracle:.4}");
    if let Some(baseline) = &model.baseline {
        println!("baseline cumulative hazard at t = 5: {:.4}", baseline.cumulative_at(5.0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
