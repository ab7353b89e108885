// Writing a cohort as a feature/survival table pair and joining it back.
//
// cargo run --example csv_cohort

use survclass::harness::{generate_synthetic, SyntheticSpec};
use survclass::io::{load_cohort, write_cohort, ExperimentConfig};

pub fn run_example() -> survclass::Result<()> {
    let dir = std::env::temp_dir().join(format!("survclass-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let spec = SyntheticSpec {
        n: 50,
        beta_true: vec![0.8, -0.4],
        noise_features: 1,
        ..SyntheticSpec::default()
    };
    let cohort = generate_synthetic(&spec)?;
    let (features, survival) = (dir.join("features.csv"), dir.join("survival.csv"));
    write_cohort(&cohort, &features, &survival)?;
    let loaded = load_cohort(&features, &survival)?;
    assert_eq!(loaded.cohort, cohort);
    println!(
        "round trip of {} subjects x {} features through {}",
        loaded.cohort.len(),
        loaded.cohort.n_features(),
        dir.display()
    );

    // The experiment file with every default spelled out.
    let config = ExperimentConfig {
        synthetic: Some(spec),
        ..ExperimentConfig::default()
    };
    println!("{}", config.to_toml());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
