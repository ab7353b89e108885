// Median-survival classification: label = survives past the Kaplan-Meier
// median, subjects censored before the median get weight 0. The trained
// network's hidden activations then feed a Cox model.
//
// cargo run --release --example median_classifier

use survclass::cox::{fit, FitConfig};
use survclass::harness::{generate_synthetic, stratified_split, SplitPlan, SyntheticSpec};
use survclass::nn::{extract_features, learned_feature_names, train, DenseNet, Head, LayerSelector, TrainConfig};
use survclass::select::{forward_select, standardize, SelectionConfig};
use survclass::survival::{censoring_weights, concordance_index, kaplan_meier, median_survival};

pub fn run_example() -> survclass::Result<()> {
    let cohort = generate_synthetic(&SyntheticSpec {
        n: 400,
        seed: 22,
        ..SyntheticSpec::default()
    })?;
    let (tr, va, te) = stratified_split(&cohort, &SplitPlan::default(), 0)?.cohorts(&cohort)?;
    let (va, te) = (va.expect("val"), te.expect("test"));
    let std = standardize(&tr, &[&va, &te])?;
    let (tr, va, te) = (&std.train, &std.others[0], &std.others[1]);

    let median = median_survival(&kaplan_meier(tr)?).expect("median reached");
    let w = censoring_weights(tr, median)?;
    let dropped = w.weights.iter().filter(|&&x| x == 0.0).count();
    println!("training median {median:.3}; {dropped} of {} subjects carry weight 0", tr.len());

    let config = TrainConfig {
        epochs: 60,
        ..TrainConfig::default()
    };
    let net = DenseNet::new(tr.n_features(), &config.hidden_layers, Head::ClassLogit, 8)?;
    let (trained, history) = train(&net, tr, va, &config)?;
    println!("best epoch {} (val weighted BCE {:.4})", history.best_epoch, history.best_validation);

    let selector = LayerSelector::All;
    let names = learned_feature_names(&trained, &selector, "")?;
    let learned = |c: &survclass::survival::Cohort| -> survclass::Result<_> {
        let s = extract_features(&trained, c, &selector)?;
        c.with_features(s, names.clone())
    };
    let (ltr, lte) = (learned(tr)?, learned(te)?);
    let std = standardize(&ltr, &[&lte])?;
    let sel = forward_select(&std.train, &SelectionConfig::default())?;
    let model = fit(&std.train.select_features(&sel.selected)?, &FitConfig::default())?;
    let test = std.others[0].select_features(&sel.selected)?;
    println!(
        "Cox on {} selected activations: test c-index {:.4}",
        sel.selected.len(),
        concordance_index(&model.hazard_scores(&test)?, &test)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> survclass::Result<()> {
    run_example()
}
