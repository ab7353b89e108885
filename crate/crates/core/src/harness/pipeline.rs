use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::seed::splitmix64;
use crate::cox::{self, FitConfig};
use crate::error::{Error, Result};
use crate::nn::{self, DenseNet, Head, LayerSelector, TrainConfig, TrainHistory};
use crate::select::{forward_select, standardize, SelectionConfig};
use crate::survival::{concordance_index, Cohort};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    /// Forward selection on the provided features, then a Cox fit.
    CoxProvidedFeatures,
    /// Hazard-head network output used directly as the test score.
    DirectHazardNet,
    /// Cox fit on selected hidden activations of the hazard network.
    CoxOnNetFeatures,
    /// Cox fit on selected provided features plus hazard-network activations.
    CoxOnMultimodalFeatures,
    /// Median-survival classifier activations plus provided features,
    /// selected and fitted with a Cox model.
    MedianClassifierThenCox,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 5] = [
        PipelineKind::CoxProvidedFeatures,
        PipelineKind::DirectHazardNet,
        PipelineKind::CoxOnNetFeatures,
        PipelineKind::CoxOnMultimodalFeatures,
        PipelineKind::MedianClassifierThenCox,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PipelineKind::CoxProvidedFeatures => "cox_provided_features",
            PipelineKind::DirectHazardNet => "direct_hazard_net",
            PipelineKind::CoxOnNetFeatures => "cox_on_net_features",
            PipelineKind::CoxOnMultimodalFeatures => "cox_on_multimodal_features",
            PipelineKind::MedianClassifierThenCox => "median_classifier_then_cox",
        }
    }

    fn net_head(self) -> Option<Head> {
        match self {
            PipelineKind::CoxProvidedFeatures => None,
            PipelineKind::DirectHazardNet | PipelineKind::CoxOnNetFeatures | PipelineKind::CoxOnMultimodalFeatures => {
                Some(Head::HazardLinear)
            }
            PipelineKind::MedianClassifierThenCox => Some(Head::ClassLogit),
        }
    }
}

impl std::fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PipelineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown pipeline '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub kind: PipelineKind,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub train: TrainConfig,
    /// Fit the Cox stage on train plus validation subjects instead of train
    /// only. Networks always use validation for early stopping alone.
    #[serde(default)]
    pub cox_uses_validation: bool,
}

impl PipelineSpec {
    pub fn new(kind: PipelineKind) -> Self {
        Self {
            kind,
            selection: SelectionConfig::default(),
            fit: FitConfig::default(),
            train: TrainConfig::default(),
            cox_uses_validation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.selection.validate()?;
        self.fit.validate()?;
        if self.kind.net_head().is_some() {
            self.train.validate()?;
        }
        Ok(())
    }

    /// Short stable fingerprint of the full spec.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("pipeline spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub kind: PipelineKind,
    /// `None` when the test partition has no comparable pair.
    pub test_cindex: Option<f64>,
    /// Feature names entering the Cox model, in selection order.
    pub selected: Vec<String>,
    pub cox_converged: Option<bool>,
    pub net_best_epoch: Option<usize>,
    /// Training-partition Kaplan-Meier median used for class labels.
    pub median_time: Option<f64>,
}

struct TrainedNet {
    net: DenseNet,
    history: TrainHistory,
}

/// Runs pipelines on one train/validation/test split, sharing trained
/// networks between pipelines that would train identical ones.
///
/// Provided features are standardized with training statistics before any
/// pipeline sees them.
pub struct SplitRunner {
    train: Cohort,
    val: Option<Cohort>,
    test: Cohort,
    seed: u64,
    nets: HashMap<(Head, String), TrainedNet>,
}

impl SplitRunner {
    /// `seed` drives network initialization and minibatch shuffling.
    pub fn new(train: &Cohort, val: Option<&Cohort>, test: &Cohort, seed: u64) -> Result<Self> {
        let mut others = vec![test];
        others.extend(val);
        let std = standardize(train, &others)?;
        let mut others = std.others.into_iter();
        let test = others.next().expect("test cohort");
        Ok(Self {
            train: std.train,
            val: others.next(),
            test,
            seed,
            nets: HashMap::new(),
        })
    }

    pub fn run(&mut self, spec: &PipelineSpec) -> Result<PipelineOutcome> {
        spec.validate()?;
        let mut outcome = PipelineOutcome {
            kind: spec.kind,
            test_cindex: None,
            selected: Vec::new(),
            cox_converged: None,
            net_best_epoch: None,
            median_time: None,
        };
        if spec.kind == PipelineKind::CoxProvidedFeatures {
            let (fit_cohort, test) = cox_inputs(spec, self.train.clone(), self.test.clone(), self.val.clone())?;
            return cox_tail(spec, &fit_cohort, &test, outcome);
        }

        let head = spec.kind.net_head().expect("network pipeline");
        let trained = self.trained_net(head, &spec.train)?;
        outcome.net_best_epoch = Some(trained.history.best_epoch);
        outcome.median_time = trained.history.median_time;
        let net = trained.net.clone();

        if spec.kind == PipelineKind::DirectHazardNet {
            let scores = self
                .test
                .subjects()
                .iter()
                .map(|s| net.output(&s.features))
                .collect::<Result<Vec<_>>>()?;
            outcome.test_cindex = defined(concordance_index(&scores, &self.test))?;
            return Ok(outcome);
        }

        let keep_provided = spec.kind != PipelineKind::CoxOnNetFeatures;
        let learned = |c: &Cohort| -> Result<Cohort> {
            let acts = nn::extract_features(&net, c, &LayerSelector::All)?;
            let mut names = nn::learned_feature_names(&net, &LayerSelector::All, "net_")?;
            let rows = if keep_provided {
                let mut all = c.feature_names().to_vec();
                all.append(&mut names);
                names = all;
                nn::FeatureBundle::new(c.feature_rows(), acts)?.concatenated
            } else {
                acts
            };
            c.with_features(rows, names)
        };
        let train = learned(&self.train)?;
        let test = learned(&self.test)?;
        let val = self.val.as_ref().map(learned).transpose()?;
        let (fit_cohort, test) = cox_inputs(spec, train, test, val)?;
        cox_tail(spec, &fit_cohort, &test, outcome)
    }

    fn trained_net(&mut self, head: Head, config: &TrainConfig) -> Result<&TrainedNet> {
        let key = (head, nn::config_hash(config));
        if !self.nets.contains_key(&key) {
            let val = self
                .val
                .as_ref()
                .ok_or_else(|| Error::invalid("network pipelines need a validation partition for early stopping"))?;
            let init_seed = splitmix64(self.seed ^ 0x01);
            let shuffle_seed = splitmix64(self.seed ^ 0x02);
            let net = DenseNet::new(self.train.n_features(), &config.hidden_layers, head, init_seed)?;
            let cfg = TrainConfig {
                rng_seed: shuffle_seed,
                ..config.clone()
            };
            let (net, history) = nn::train(&net, &self.train, val, &cfg)?;
            self.nets.insert(key.clone(), TrainedNet { net, history });
        }
        Ok(&self.nets[&key])
    }
}

/// Cohorts the Cox stage fits and scores on: training (optionally merged
/// with validation) and test, both standardized on the fitting cohort.
fn cox_inputs(spec: &PipelineSpec, train: Cohort, test: Cohort, val: Option<Cohort>) -> Result<(Cohort, Cohort)> {
    let fit = match val {
        Some(v) if spec.cox_uses_validation => {
            let mut subjects = train.subjects().to_vec();
            subjects.extend(v.subjects().iter().cloned());
            Cohort::new(subjects, train.feature_names().to_vec())?
        }
        _ => train,
    };
    let std = standardize(&fit, &[&test])?;
    let test = std.others.into_iter().next().expect("test cohort");
    Ok((std.train, test))
}

fn defined(c: Result<f64>) -> Result<Option<f64>> {
    match c {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedConcordance) => Ok(None),
        Err(e) => Err(e),
    }
}

fn cox_tail(spec: &PipelineSpec, fit_cohort: &Cohort, test: &Cohort, mut outcome: PipelineOutcome) -> Result<PipelineOutcome> {
    let selection = forward_select(fit_cohort, &spec.selection)?;
    let model = cox::fit(&fit_cohort.select_features(&selection.selected)?, &spec.fit)?;
    let scores = model.hazard_scores(&test.select_features(&selection.selected)?)?;
    outcome.selected = model.feature_names.clone();
    outcome.cox_converged = Some(model.converged);
    outcome.test_cindex = defined(concordance_index(&scores, test))?;
    Ok(outcome)
}

/// One pipeline on one split. Fitting and selection see only `train` (and
/// `val` for early stopping or when `cox_uses_validation` is set); `test` is
/// only scored.
pub fn run_pipeline(spec: &PipelineSpec, train: &Cohort, val: Option<&Cohort>, test: &Cohort, seed: u64) -> Result<PipelineOutcome> {
    SplitRunner::new(train, val, test, seed)?.run(spec)
}
