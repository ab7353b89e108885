// Forward selection with a Spearman redundancy filter. One feature is a
// noisy copy of a signal feature and gets rejected.
//
// cargo run --example feature_selection

use survclass::harness::{generate_synthetic, SyntheticSpec};
use survclass::select::{forward_select, SelectionConfig};

pub fn run_example() -> survclass::Result<()> {
    let spec = SyntheticSpec {
        n: 400,
        beta_true: vec![1.0, -0.7, 0.4],
        noise_features: 4,
        seed: 5,
        ..SyntheticSpec::default()
    };
    let base = generate_synthetic(&spec)?;
    // Append a near-duplicate of signal0.
    let rows: Vec<Vec<f64>> = base
        .feature_rows()
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            let jitter = 0.05 * ((i * 7919 % 101) as f64 / 101.0 - 0.5);
            r.push(r[0] + jitter);
            r
        })
        .collect();
    let mut names = base.feature_names().to_vec();
    names.push("signal0_copy".into());
    let cohort = base.with_features(rows, names.clone())?;

    let config = SelectionConfig {
        max_features: 5,
        ..SelectionConfig::default()
    };
    let result = forward_select(&cohort, &config)?;
    for (rank, &k) in result.selected.iter().enumerate() {
        println!("{}. {:<13} univariate c = {:.3}", rank + 1, names[k], result.univariate_cindex[k]);
    }
    for r in &result.rejected_for_correlation {
        println!(
            "rejected {:<13} |rho| = {:.3} against {}",
            names[r.index],
            r.rho.abs(),
            names[r.conflicting_index]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
