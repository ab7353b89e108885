use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::pipeline::PipelineKind;

/// Per-pipeline results over all repeats of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub pipeline: PipelineKind,
    pub pipeline_digest: String,
    /// Test c-index of every split where it was defined, by repeat index.
    pub per_split_cindex: Vec<f64>,
    /// Repeat indices whose test c-index was undefined or whose run failed.
    pub skipped: Vec<usize>,
    /// Model seed of every repeat, by repeat index.
    pub seeds: Vec<u64>,
    pub mean: f64,
    /// Sample (n - 1) standard deviation; 0 for a single split.
    pub std: f64,
}

impl ExperimentReport {
    pub fn new(pipeline: PipelineKind, pipeline_digest: String, per_split_cindex: Vec<f64>, skipped: Vec<usize>, seeds: Vec<u64>) -> Self {
        let (mean, std) = mean_and_std(&per_split_cindex);
        Self {
            pipeline,
            pipeline_digest,
            per_split_cindex,
            skipped,
            seeds,
            mean,
            std,
        }
    }
}

/// Mean and sample standard deviation. NaN mean for an empty slice.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// `"0.623 ± 0.039"`.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.3} ± {std:.3}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub pipeline: PipelineKind,
    pub mean: f64,
    pub std: f64,
    pub n_splits: usize,
    pub n_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// Recomputes mean ± std from each report's stored per-split values.
pub fn aggregate(reports: &[ExperimentReport]) -> SummaryTable {
    SummaryTable {
        rows: reports
            .iter()
            .map(|r| {
                let (mean, std) = mean_and_std(&r.per_split_cindex);
                SummaryRow {
                    pipeline: r.pipeline,
                    mean,
                    std,
                    n_splits: r.per_split_cindex.len(),
                    n_skipped: r.skipped.len(),
                }
            })
            .collect(),
    }
}

impl SummaryTable {
    pub fn row(&self, pipeline: PipelineKind) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.pipeline == pipeline)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<28}  {:<15}  {:>6}  {:>7}", "pipeline", "c-index", "splits", "skipped");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<28}  {:<15}  {:>6}  {:>7}",
                r.pipeline.as_str(),
                format_mean_std(r.mean, r.std),
                r.n_splits,
                r.n_skipped
            );
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("pipeline,mean,std,n_splits,n_skipped\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:?},{:?},{},{}", r.pipeline.as_str(), r.mean, r.std, r.n_splits, r.n_skipped);
        }
        out
    }
}
