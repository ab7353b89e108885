use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{PipelineKind, PipelineSpec, SplitRunner};
use super::report::{aggregate, ExperimentReport, SummaryTable};
use super::seed::{derive_seed, Stage};
use super::split::{stratified_split, SplitPlan};
use crate::error::{Error, Result};
use crate::survival::Cohort;

pub const EXPERIMENT_FORMAT: &str = "survclass-experiment";
pub const EXPERIMENT_VERSION: u32 = 1;

/// Outcome of one pipeline on one repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub repeat_index: usize,
    pub seed: u64,
    pub pipeline: PipelineKind,
    pub test_cindex: Option<f64>,
    pub selected: Vec<String>,
    pub cox_converged: Option<bool>,
    pub net_best_epoch: Option<usize>,
    pub median_time: Option<f64>,
    /// Why the split was skipped, when it was.
    pub skip_reason: Option<String>,
}

/// Whole-experiment document; serializes to the persisted report format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub format: String,
    pub version: u32,
    pub plan: SplitPlan,
    pub n_subjects: usize,
    pub n_events: usize,
    /// Where the median survival time for class labels comes from.
    pub median_policy: String,
    pub pipelines: Vec<PipelineSpec>,
    pub records: Vec<SplitRecord>,
    pub reports: Vec<ExperimentReport>,
    pub summary: SummaryTable,
}

impl Experiment {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("experiment serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let exp: Experiment = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if exp.format != EXPERIMENT_FORMAT || exp.version != EXPERIMENT_VERSION {
            return Err(Error::Config(format!("unsupported report {} v{}", exp.format, exp.version)));
        }
        Ok(exp)
    }

    pub fn report(&self, kind: PipelineKind) -> Option<&ExperimentReport> {
        self.reports.iter().find(|r| r.pipeline == kind)
    }
}

fn run_repeat(cohort: &Cohort, plan: &SplitPlan, pipelines: &[PipelineSpec], repeat: usize) -> Result<Vec<SplitRecord>> {
    let seed = derive_seed(plan.master_seed, repeat as u64, Stage::Model);
    let partition = stratified_split(cohort, plan, repeat)?;
    let (train, val, test) = partition.cohorts(cohort)?;
    let test = test.ok_or_else(|| Error::invalid("experiment needs a nonempty test fraction"))?;
    let mut runner = SplitRunner::new(&train, val.as_ref(), &test, seed)?;
    let mut records = Vec::with_capacity(pipelines.len());
    for spec in pipelines {
        let mut record = SplitRecord {
            repeat_index: repeat,
            seed,
            pipeline: spec.kind,
            test_cindex: None,
            selected: Vec::new(),
            cox_converged: None,
            net_best_epoch: None,
            median_time: None,
            skip_reason: None,
        };
        match runner.run(spec) {
            Ok(o) => {
                record.skip_reason = o.test_cindex.is_none().then(|| "undefined test c-index".to_string());
                record.test_cindex = o.test_cindex;
                record.selected = o.selected;
                record.cox_converged = o.cox_converged;
                record.net_best_epoch = o.net_best_epoch;
                record.median_time = o.median_time;
            }
            Err(e @ (Error::InvalidInput(_) | Error::Config(_))) => return Err(e),
            Err(e) => record.skip_reason = Some(e.to_string()),
        }
        records.push(record);
    }
    Ok(records)
}

/// Runs every pipeline on `plan.n_repeats` stratified splits of `cohort`.
///
/// Repeats execute on up to `workers` threads; records are ordered by
/// repeat index and then pipeline order, so the output does not depend on
/// scheduling. Splits whose test c-index is undefined, or whose fit fails
/// numerically, are skipped and counted rather than imputed.
pub fn run_experiment(cohort: &Cohort, plan: &SplitPlan, pipelines: &[PipelineSpec], workers: usize) -> Result<Experiment> {
    plan.validate()?;
    if pipelines.is_empty() {
        return Err(Error::invalid("experiment needs at least one pipeline"));
    }
    for p in pipelines {
        p.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let per_repeat: Vec<Vec<SplitRecord>> = pool.install(|| {
        (0..plan.n_repeats)
            .into_par_iter()
            .map(|r| run_repeat(cohort, plan, pipelines, r))
            .collect::<Result<_>>()
    })?;
    let records: Vec<SplitRecord> = per_repeat.into_iter().flatten().collect();

    let reports: Vec<ExperimentReport> = pipelines
        .iter()
        .map(|spec| {
            let mine: Vec<&SplitRecord> = records.iter().filter(|r| r.pipeline == spec.kind).collect();
            ExperimentReport::new(
                spec.kind,
                spec.digest(),
                mine.iter().filter_map(|r| r.test_cindex).collect(),
                mine.iter().filter(|r| r.test_cindex.is_none()).map(|r| r.repeat_index).collect(),
                mine.iter().map(|r| r.seed).collect(),
            )
        })
        .collect();
    let summary = aggregate(&reports);

    Ok(Experiment {
        format: EXPERIMENT_FORMAT.to_string(),
        version: EXPERIMENT_VERSION,
        plan: plan.clone(),
        n_subjects: cohort.len(),
        n_events: cohort.n_events(),
        median_policy: "Kaplan-Meier median of each training partition".to_string(),
        pipelines: pipelines.to_vec(),
        records,
        reports,
        summary,
    })
}
