// Direct hazard regression: a dense network trained on the Cox partial
// likelihood, with early stopping on validation c-index.
//
// cargo run --release --example hazard_net

use survclass::harness::{generate_synthetic, stratified_split, SplitPlan, SyntheticSpec};
use survclass::nn::{train, DenseNet, Head, TrainConfig};
use survclass::select::standardize;
use survclass::survival::concordance_index;

pub fn run_example() -> survclass::Result<()> {
    let cohort = generate_synthetic(&SyntheticSpec {
        n: 400,
        seed: 21,
        ..SyntheticSpec::default()
    })?;
    let plan = SplitPlan::default();
    let (tr, va, te) = stratified_split(&cohort, &plan, 0)?.cohorts(&cohort)?;
    let (va, te) = (va.expect("val"), te.expect("test"));
    let std = standardize(&tr, &[&va, &te])?;
    let (tr, va, te) = (&std.train, &std.others[0], &std.others[1]);

    let config = TrainConfig {
        epochs: 60,
        ..TrainConfig::default()
    };
    let net = DenseNet::new(tr.n_features(), &config.hidden_layers, Head::HazardLinear, 7)?;
    let (trained, history) = train(&net, tr, va, &config)?;
    for e in history.epochs.iter().step_by(10) {
        println!("epoch {:>3}: train loss {:.4}, val c-index {:.4}", e.epoch, e.train_loss, e.validation);
    }
    println!(
        "best epoch {} (val c-index {:.4}), stopped early: {}",
        history.best_epoch, history.best_validation, history.stopped_early
    );
    let scores = te
        .subjects()
        .iter()
        .map(|s| trained.output(&s.features))
        .collect::<survclass::Result<Vec<_>>>()?;
    println!("test c-index: {:.4}", concordance_index(&scores, te)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
