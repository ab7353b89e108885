use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cox::FitConfig;
use crate::error::{Error, Result};
use crate::harness::{PipelineKind, PipelineSpec, SplitPlan, SyntheticSpec};
use crate::nn::TrainConfig;
use crate::select::SelectionConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub features: PathBuf,
    pub survival: PathBuf,
}

/// Experiment file (TOML). Every section is optional and defaults to the
/// library defaults; either `[data]` or `[synthetic]` names the cohort.
///
/// ```toml
/// pipelines = ["cox_provided_features", "median_classifier_then_cox"]
///
/// [split]
/// n_repeats = 100
/// master_seed = 7
///
/// [synthetic]
/// n = 800
/// beta_true = [1.0, -0.8, 0.6, -0.5, 0.4, -0.3]
/// noise_features = 14
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipelines: Vec<PipelineKind>,
    pub cox_uses_validation: bool,
    pub workers: usize,
    pub split: SplitPlan,
    pub selection: SelectionConfig,
    pub fit: FitConfig,
    pub train: TrainConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataPaths>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pipelines: PipelineKind::ALL.to_vec(),
            cox_uses_validation: false,
            workers: 1,
            split: SplitPlan::default(),
            selection: SelectionConfig::default(),
            fit: FitConfig::default(),
            train: TrainConfig::default(),
            data: None,
            synthetic: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(data), Some(dir)) = (cfg.data.as_mut(), path.parent()) {
            for p in [&mut data.features, &mut data.survival] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn pipeline_specs(&self) -> Vec<PipelineSpec> {
        self.pipelines
            .iter()
            .map(|&kind| PipelineSpec {
                kind,
                selection: self.selection.clone(),
                fit: self.fit.clone(),
                train: self.train.clone(),
                cox_uses_validation: self.cox_uses_validation,
            })
            .collect()
    }
}
