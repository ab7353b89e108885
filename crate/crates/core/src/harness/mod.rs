//! Evaluation protocol: synthetic ground truth, repeated stratified splits,
//! the pipeline variants and mean ± std aggregation.

mod experiment;
mod pipeline;
mod report;
mod seed;
mod split;
mod synth;

pub use experiment::{run_experiment, Experiment, SplitRecord, EXPERIMENT_FORMAT, EXPERIMENT_VERSION};
pub use pipeline::{run_pipeline, PipelineKind, PipelineOutcome, PipelineSpec, SplitRunner};
pub use report::{aggregate, format_mean_std, mean_and_std, ExperimentReport, SummaryRow, SummaryTable};
pub use seed::{derive_seed, splitmix64, Stage};
pub use split::{stratified_split, Partition, SplitPlan};
pub use synth::{generate_synthetic, true_scores, SyntheticSpec};
