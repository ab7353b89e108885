use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{bce_indexed, cox_indexed, Rows};
use super::net::{DenseNet, Head};
use crate::error::{Error, Result};
use crate::survival::{
    censoring_weights, concordance_index_raw, kaplan_meier, median_class_labels, median_survival, Cohort,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMetric {
    /// Higher is better. Classification outputs are negated into hazards.
    Cindex,
    /// Lower is better; classification mode only.
    WeightedBce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub early_stopping_patience: usize,
    /// `None` picks c-index for hazard heads and weighted BCE for classifiers.
    pub validation_metric: Option<ValidationMetric>,
    pub weight_decay: f64,
    pub rng_seed: u64,
    pub hidden_layers: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            epochs: 100,
            learning_rate: 0.03,
            early_stopping_patience: 10,
            validation_metric: None,
            weight_decay: 0.1,
            rng_seed: 0,
            hidden_layers: vec![32, 16],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be finite and >= 0"));
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 {
            return Err(Error::invalid("weight_decay must be >= 0"));
        }
        Ok(())
    }

    pub fn metric_for(&self, head: Head) -> ValidationMetric {
        self.validation_metric.unwrap_or(match head {
            Head::HazardLinear => ValidationMetric::Cindex,
            Head::ClassLogit => ValidationMetric::WeightedBce,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Training objective on the full training set after this epoch.
    pub train_loss: f64,
    pub validation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub metric: ValidationMetric,
    /// Entry 0 describes the untrained network.
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned (0 = initial parameters).
    pub best_epoch: usize,
    pub best_validation: f64,
    pub stopped_early: bool,
    /// Median used for labels and weights, classification mode only.
    pub median_time: Option<f64>,
}

impl TrainHistory {
    pub fn initial_train_loss(&self) -> f64 {
        self.epochs[0].train_loss
    }

    pub fn final_train_loss(&self) -> f64 {
        self.epochs.last().unwrap().train_loss
    }
}

struct ClassTargets {
    labels: Vec<u8>,
    weights: Vec<f64>,
}

impl ClassTargets {
    fn new(cohort: &Cohort, median: f64) -> Result<Self> {
        Ok(Self {
            labels: median_class_labels(cohort, median)?,
            weights: censoring_weights(cohort, median)?.weights,
        })
    }
}

/// Trains `net` in the mode given by its head.
///
/// Classification mode derives the median survival time from a Kaplan-Meier
/// fit of `train`; use [`train_classifier`] to supply it explicitly.
pub fn train(net: &DenseNet, train: &Cohort, val: &Cohort, config: &TrainConfig) -> Result<(DenseNet, TrainHistory)> {
    match net.head() {
        Head::HazardLinear => run(net, train, val, config, None),
        Head::ClassLogit => {
            let median = median_survival(&kaplan_meier(train)?).ok_or(Error::UndefinedMedian)?;
            run(net, train, val, config, Some(median))
        }
    }
}

/// Median-survival classification with a caller-chosen median.
pub fn train_classifier(
    net: &DenseNet,
    train: &Cohort,
    val: &Cohort,
    median_time: f64,
    config: &TrainConfig,
) -> Result<(DenseNet, TrainHistory)> {
    if net.head() != Head::ClassLogit {
        return Err(Error::invalid("train_classifier needs a class_logit head"));
    }
    run(net, train, val, config, Some(median_time))
}

fn run(
    initial: &DenseNet,
    train: &Cohort,
    val: &Cohort,
    config: &TrainConfig,
    median: Option<f64>,
) -> Result<(DenseNet, TrainHistory)> {
    config.validate()?;
    let head = initial.head();
    if head == Head::HazardLinear && config.batch_size < 2 {
        return Err(Error::SingleSubjectCoxBatch);
    }
    let metric = config.metric_for(head);
    if metric == ValidationMetric::WeightedBce && head != Head::ClassLogit {
        return Err(Error::invalid("weighted_bce validation needs a class_logit head"));
    }
    for c in [train, val] {
        if c.n_features() != initial.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: initial.input_dim(),
                found: c.n_features(),
            });
        }
    }

    let train_rows = Rows::from_cohort(train);
    let val_rows = Rows::from_cohort(val);
    let targets = median.map(|m| Ok::<_, Error>((ClassTargets::new(train, m)?, ClassTargets::new(val, m)?)));
    let targets = targets.transpose()?;

    let all_train: Vec<usize> = (0..train.len()).collect();
    let all_val: Vec<usize> = (0..val.len()).collect();

    let objective = |net: &DenseNet| -> f64 {
        match &targets {
            None => {
                let (loss, _) = cox_indexed(net, &train_rows, &all_train, false);
                loss.value / train.n_events().max(1) as f64
            }
            Some((t, _)) => bce_indexed(net, &train_rows.features, &t.labels, &t.weights, &all_train, false).0,
        }
    };
    let validate = |net: &DenseNet| -> Result<f64> {
        match metric {
            ValidationMetric::Cindex => {
                let sign = if head == Head::ClassLogit { -1.0 } else { 1.0 };
                let scores: Vec<f64> = val_rows.features.iter().map(|x| sign * net.output_unchecked(x)).collect();
                if scores.iter().any(|s| !s.is_finite()) {
                    return Err(Error::Numerical("network produced non-finite outputs".into()));
                }
                concordance_index_raw(&scores, &val_rows.times, &val_rows.events)?.value()
            }
            ValidationMetric::WeightedBce => {
                let (_, v) = targets.as_ref().expect("classification targets");
                Ok(bce_indexed(net, &val_rows.features, &v.labels, &v.weights, &all_val, false).0)
            }
        }
    };
    let improves = |candidate: f64, best: f64| match metric {
        ValidationMetric::Cindex => candidate > best,
        ValidationMetric::WeightedBce => candidate < best,
    };

    let mut net = initial.clone();
    let mut best = net.clone();
    let mut best_validation = validate(&net)?;
    let mut history = TrainHistory {
        metric,
        epochs: vec![EpochRecord {
            epoch: 0,
            train_loss: objective(&net),
            validation: best_validation,
        }],
        best_epoch: 0,
        best_validation,
        stopped_early: false,
        median_time: median,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut order = all_train.clone();
    let mut since_best = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let grads = match &targets {
                None => {
                    let (_, g) = cox_indexed(&net, &train_rows, batch, true);
                    let mut g = g.expect("gradients requested");
                    let events = batch.iter().filter(|&&i| train_rows.events[i]).count();
                    if events > 0 {
                        g.scale(1.0 / events as f64);
                    }
                    g
                }
                Some((t, _)) => bce_indexed(&net, &train_rows.features, &t.labels, &t.weights, batch, true)
                    .1
                    .expect("gradients requested"),
            };
            if grads.flatten().iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerical(format!("non-finite gradient in epoch {epoch}")));
            }
            net.apply_step(&grads, config.learning_rate, config.weight_decay);
        }

        let validation = validate(&net)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: objective(&net),
            validation,
        });
        if improves(validation, best_validation) {
            best_validation = validation;
            best = net.clone();
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.early_stopping_patience {
                history.stopped_early = true;
                break;
            }
        }
    }
    history.best_validation = best_validation;
    Ok((best, history))
}
