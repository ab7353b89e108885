//! Tabular input, experiment configuration and output files.
//!
//! Inputs are comma-separated with a header row. The feature table has a
//! `subject_id` column plus one numeric column per feature; the survival
//! table has `subject_id`, `time` and `event` (0 or 1) and may carry extra
//! columns, which are ignored.

mod config;
mod tables;

pub use config::{DataPaths, ExperimentConfig};
pub use tables::{
    load_cohort, parse_feature_table, parse_scores, parse_survival_table, read_feature_table, read_scores,
    read_survival_table, write_cohort, FeatureTable, LoadedCohort, SurvivalRow, SurvivalTable,
};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
