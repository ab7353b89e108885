//! Command-line front end.
//!
//! Every subcommand is a thin composition of library calls. Results go to
//! stdout as text; with `--out-dir` they are also written as files. Exit
//! status: 0 success, 1 usage error, 2 data validation error, 3 numerical
//! failure (including non-convergence under `--strict`).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cox::{self, CoxModel, FitConfig};
use crate::error::{Error, Result};
use crate::harness::{self, stratified_split, ExperimentReport, SplitPlan, SyntheticSpec};
use crate::io::{self, ExperimentConfig};
use crate::nn::{self, DenseNet, Head, TrainConfig};
use crate::select::{self, SelectionConfig};
use crate::survival::{concordance_index, concordance_index_raw, kaplan_meier_raw, median_survival, Cohort};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "survclass", version, about = "Survival analysis with Cox models and dense networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for splits, initialisation and synthetic data (overrides config files).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for `experiment` (overrides the config file).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Treat Cox non-convergence as a failure (exit status 3).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Directory for output files; created if missing.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CohortArgs {
    /// Feature table (subject_id plus one numeric column per feature).
    #[arg(long)]
    pub features: PathBuf,
    /// Survival table (subject_id, time, event).
    #[arg(long)]
    pub survival: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Direct hazard regression with the Cox partial likelihood.
    Hazard,
    /// Above/below median survival classification.
    Classify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kaplan-Meier curve and median survival time.
    Km {
        #[arg(long)]
        survival: PathBuf,
    },
    /// Concordance index of a score column (higher = higher risk).
    Cindex {
        /// Table with subject_id and the score column.
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = "score")]
        column: String,
        #[arg(long)]
        survival: PathBuf,
    },
    /// Fit a Cox model on a training split; report coefficients and c-index.
    CoxFit {
        #[command(flatten)]
        cohort: CohortArgs,
        /// Share of subjects held out for testing (0 fits on everything).
        #[arg(long, default_value_t = 0.25)]
        test_fraction: f64,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        ridge: Option<f64>,
    },
    /// Forward feature selection report.
    Select {
        #[command(flatten)]
        cohort: CohortArgs,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        max_features: Option<usize>,
        #[arg(long)]
        min_cindex: Option<f64>,
    },
    /// Train a network and save a checkpoint.
    Train {
        #[command(flatten)]
        cohort: CohortArgs,
        #[arg(long, value_enum, default_value_t = Mode::Hazard)]
        mode: Mode,
        /// Share of subjects used for early stopping.
        #[arg(long, default_value_t = 0.2)]
        val_fraction: f64,
        /// TOML file whose `[train]` section supplies the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        #[arg(long)]
        patience: Option<usize>,
        /// Hidden widths, e.g. `32,16`.
        #[arg(long, value_delimiter = ',')]
        hidden: Option<Vec<usize>>,
    },
    /// Write a synthetic cohort (features.csv, survival.csv).
    Synth {
        /// TOML file whose `[synthetic]` section supplies the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// True coefficients of the signal features, e.g. `1,-0.5`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Option<Vec<f64>>,
        #[arg(long)]
        noise_features: Option<usize>,
        #[arg(long)]
        baseline_rate: Option<f64>,
        #[arg(long)]
        censoring_rate: Option<f64>,
    },
    /// Run every configured pipeline over repeated splits.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut notes = String::new();
    match execute(&cli, &mut notes) {
        Ok(text) => {
            let _ = stderr.write_all(notes.as_bytes());
            let _ = stdout.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = stderr.write_all(notes.as_bytes());
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for a library error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InvalidInput(_) | Error::SingleSubjectCoxBatch | Error::InvalidLayer { .. } => EXIT_USAGE,
        Error::Data(_)
        | Error::Io { .. }
        | Error::Config(_)
        | Error::Checkpoint(_)
        | Error::DimensionMismatch { .. }
        | Error::StratumTooSmall { .. } => EXIT_DATA,
        Error::NonConvergence { .. }
        | Error::Numerical(_)
        | Error::UndefinedConcordance
        | Error::UndefinedCorrelation
        | Error::UndefinedMedian
        | Error::DegenerateDesign(_) => EXIT_NUMERICAL,
    }
}

fn execute(cli: &Cli, notes: &mut String) -> Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Km { survival } => km(g, survival),
        Command::Cindex { scores, column, survival } => cindex(g, scores, column, survival, notes),
        Command::CoxFit {
            cohort,
            test_fraction,
            max_iterations,
            ridge,
        } => {
            let mut fit = FitConfig::default();
            if let Some(m) = max_iterations {
                fit.max_iterations = *m;
            }
            if let Some(r) = ridge {
                fit.ridge = *r;
            }
            cox_fit(g, &load(cohort, notes)?, *test_fraction, &fit)
        }
        Command::Select {
            cohort,
            threshold,
            max_features,
            min_cindex,
        } => {
            let mut cfg = SelectionConfig::default();
            if let Some(t) = threshold {
                cfg.correlation_threshold = *t;
            }
            if let Some(m) = max_features {
                cfg.max_features = *m;
            }
            if let Some(c) = min_cindex {
                cfg.min_univariate_cindex = *c;
            }
            selection(g, &load(cohort, notes)?, &cfg)
        }
        Command::Train {
            cohort,
            mode,
            val_fraction,
            config,
            epochs,
            batch_size,
            learning_rate,
            weight_decay,
            patience,
            hidden,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(p)?.train,
                None => TrainConfig::default(),
            };
            if let Some(v) = epochs {
                cfg.epochs = *v;
            }
            if let Some(v) = batch_size {
                cfg.batch_size = *v;
            }
            if let Some(v) = learning_rate {
                cfg.learning_rate = *v;
            }
            if let Some(v) = weight_decay {
                cfg.weight_decay = *v;
            }
            if let Some(v) = patience {
                cfg.early_stopping_patience = *v;
            }
            if let Some(v) = hidden {
                cfg.hidden_layers = v.clone();
            }
            if let Some(s) = g.seed {
                cfg.rng_seed = s;
            }
            train(g, &load(cohort, notes)?, *mode, *val_fraction, &cfg)
        }
        Command::Synth {
            config,
            n,
            beta,
            noise_features,
            baseline_rate,
            censoring_rate,
        } => {
            let mut spec = match config {
                Some(p) => ExperimentConfig::load(p)?.synthetic.unwrap_or_default(),
                None => SyntheticSpec::default(),
            };
            if let Some(v) = n {
                spec.n = *v;
            }
            if let Some(v) = beta {
                spec.beta_true = v.clone();
            }
            if let Some(v) = noise_features {
                spec.noise_features = *v;
            }
            if let Some(v) = baseline_rate {
                spec.baseline_rate = *v;
            }
            if let Some(v) = censoring_rate {
                spec.censoring_rate = *v;
            }
            if let Some(s) = g.seed {
                spec.seed = s;
            }
            synth(g, &spec)
        }
        Command::Experiment { config } => experiment(g, config, notes),
    }
}

fn load(args: &CohortArgs, notes: &mut String) -> Result<Cohort> {
    let loaded = io::load_cohort(&args.features, &args.survival)?;
    report_unmatched(notes, &loaded.only_in_features, &args.features);
    report_unmatched(notes, &loaded.only_in_survival, &args.survival);
    Ok(loaded.cohort)
}

fn report_unmatched(notes: &mut String, ids: &[String], path: &Path) {
    if !ids.is_empty() {
        let _ = writeln!(
            notes,
            "warning: {} subject(s) only in {}: {}",
            ids.len(),
            path.display(),
            ids.join(", ")
        );
    }
}

fn out_dir(g: &GlobalArgs) -> Result<Option<&Path>> {
    match &g.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

/// Output directory for subcommands whose product is a file.
fn out_dir_or_cwd(g: &GlobalArgs) -> Result<PathBuf> {
    Ok(out_dir(g)?.map_or_else(|| PathBuf::from("."), Path::to_path_buf))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn km(g: &GlobalArgs, survival: &Path) -> Result<String> {
    let table = io::read_survival_table(survival)?;
    let times: Vec<f64> = table.rows.iter().map(|r| r.time).collect();
    let events: Vec<bool> = table.rows.iter().map(|r| r.event).collect();
    let curve = kaplan_meier_raw(&times, &events)?;
    let mut csv = String::from("time,at_risk,events,survival\n");
    for p in &curve.points {
        let _ = writeln!(csv, "{},{},{},{}", p.time, p.at_risk, p.events, p.survival);
    }
    let median = median_survival(&curve);
    let median_text = median.map_or_else(|| "undefined".to_string(), |m| m.to_string());
    if let Some(dir) = out_dir(g)? {
        io::write_file(&dir.join("km.csv"), &csv)?;
    }
    Ok(format!("{csv}median: {median_text}\n"))
}

fn cindex(g: &GlobalArgs, scores: &Path, column: &str, survival: &Path, notes: &mut String) -> Result<String> {
    let scores_by_id = io::read_scores(scores, column)?;
    let table = io::read_survival_table(survival)?;
    let mut by_id: BTreeMap<&str, (f64, bool)> = BTreeMap::new();
    for r in &table.rows {
        by_id.insert(r.id.as_str(), (r.time, r.event));
    }
    let (mut s, mut t, mut e) = (Vec::new(), Vec::new(), Vec::new());
    let mut only_scores = Vec::new();
    for (id, score) in &scores_by_id {
        match by_id.remove(id.as_str()) {
            Some((time, event)) => {
                s.push(*score);
                t.push(time);
                e.push(event);
            }
            None => only_scores.push(id.clone()),
        }
    }
    let only_survival: Vec<String> = by_id.into_keys().map(str::to_string).collect();
    report_unmatched(notes, &only_scores, scores);
    report_unmatched(notes, &only_survival, survival);
    if s.is_empty() {
        return Err(crate::error::DataError::EmptyJoin.into());
    }
    let c = concordance_index_raw(&s, &t, &e)?;
    let value = c.value()?;
    let text = format!(
        "c-index: {value}\nconcordant: {}\ncomparable: {}\nsubjects: {}\n",
        c.concordant,
        c.comparable,
        s.len()
    );
    if let Some(dir) = out_dir(g)? {
        io::write_file(&dir.join("cindex.txt"), &text)?;
    }
    Ok(text)
}

#[derive(Serialize)]
struct CoxFitReport<'a> {
    model: &'a CoxModel,
    n_train: usize,
    n_test: usize,
    train_cindex: Option<f64>,
    test_cindex: Option<f64>,
    seed: u64,
}

fn cox_fit(g: &GlobalArgs, cohort: &Cohort, test_fraction: f64, fit: &FitConfig) -> Result<String> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::invalid("--test-fraction must be in [0, 1)"));
    }
    let seed = g.seed.unwrap_or(0);
    let (train, test) = if test_fraction == 0.0 {
        (cohort.clone(), None)
    } else {
        let plan = SplitPlan {
            n_repeats: 1,
            train_fraction: 1.0 - test_fraction,
            val_fraction: 0.0,
            test_fraction,
            master_seed: seed,
        };
        let (train, _, test) = stratified_split(cohort, &plan, 0)?.cohorts(cohort)?;
        (train, test)
    };
    let model = cox::fit(&train, fit)?.with_baseline(&train)?;
    if g.strict && !model.converged {
        return Err(Error::NonConvergence {
            iterations: model.iterations,
        });
    }
    let cindex_of = |c: &Cohort| -> Result<Option<f64>> {
        match concordance_index(&model.hazard_scores(c)?, c) {
            Ok(v) => Ok(Some(v)),
            Err(Error::UndefinedConcordance) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let report = CoxFitReport {
        model: &model,
        n_train: train.len(),
        n_test: test.as_ref().map_or(0, Cohort::len),
        train_cindex: cindex_of(&train)?,
        test_cindex: test.as_ref().map(&cindex_of).transpose()?.flatten(),
        seed,
    };
    if let Some(dir) = out_dir(g)? {
        io::write_file(&dir.join("cox_fit.json"), &json(&report))?;
    }
    let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"));
    let mut text = String::from("feature,beta\n");
    for (name, b) in model.feature_names.iter().zip(&model.beta) {
        let _ = writeln!(text, "{name},{b:.6}");
    }
    let _ = writeln!(
        text,
        "converged: {} ({} iterations)\nnegative log partial likelihood: {:.6}\ntrain c-index: {} (n = {})\ntest c-index: {} (n = {})",
        model.converged,
        model.iterations,
        model.final_nll,
        opt(report.train_cindex),
        report.n_train,
        opt(report.test_cindex),
        report.n_test
    );
    Ok(text)
}

#[derive(Serialize)]
struct SelectionReport<'a> {
    config: &'a SelectionConfig,
    feature_names: &'a [String],
    selected: Vec<&'a str>,
    result: &'a select::SelectionResult,
}

fn selection(g: &GlobalArgs, cohort: &Cohort, cfg: &SelectionConfig) -> Result<String> {
    let result = select::forward_select(cohort, cfg)?;
    let names = cohort.feature_names();
    let report = SelectionReport {
        config: cfg,
        feature_names: names,
        selected: result.selected.iter().map(|&k| names[k].as_str()).collect(),
        result: &result,
    };
    if let Some(dir) = out_dir(g)? {
        io::write_file(&dir.join("selection.json"), &json(&report))?;
    }
    let mut text = String::from("rank,feature,univariate_cindex\n");
    for (rank, &k) in result.selected.iter().enumerate() {
        let _ = writeln!(text, "{},{},{:.6}", rank + 1, names[k], result.univariate_cindex[k]);
    }
    for r in &result.rejected_for_correlation {
        let _ = writeln!(
            text,
            "rejected {} (rho = {:.4} with {})",
            names[r.index], r.rho, names[r.conflicting_index]
        );
    }
    for &k in &result.skipped_constant {
        let _ = writeln!(text, "skipped constant {}", names[k]);
    }
    Ok(text)
}

#[derive(Serialize)]
struct Scaler<'a> {
    feature_names: &'a [String],
    means: &'a [f64],
    stds: &'a [f64],
}

fn train(g: &GlobalArgs, cohort: &Cohort, mode: Mode, val_fraction: f64, cfg: &TrainConfig) -> Result<String> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::invalid("--val-fraction must be in (0, 1)"));
    }
    let plan = SplitPlan {
        n_repeats: 1,
        train_fraction: 1.0 - val_fraction,
        val_fraction,
        test_fraction: 0.0,
        master_seed: cfg.rng_seed,
    };
    let (train_raw, val_raw, _) = stratified_split(cohort, &plan, 0)?.cohorts(cohort)?;
    let val_raw = val_raw.ok_or_else(|| Error::invalid("validation partition is empty"))?;
    let std = select::standardize(&train_raw, &[&val_raw])?;
    let head = match mode {
        Mode::Hazard => Head::HazardLinear,
        Mode::Classify => Head::ClassLogit,
    };
    let net = DenseNet::new(cohort.n_features(), &cfg.hidden_layers, head, cfg.rng_seed)?;
    let (trained, history) = nn::train(&net, &std.train, &std.others[0], cfg)?;
    let dir = out_dir_or_cwd(g)?;
    nn::save_checkpoint(&dir.join("checkpoint.txt"), &trained, Some(cfg))?;
    io::write_file(&dir.join("history.json"), &json(&history))?;
    let scaler = Scaler {
        feature_names: cohort.feature_names(),
        means: &std.means,
        stds: &std.stds,
    };
    io::write_file(&dir.join("scaler.json"), &json(&scaler))?;
    let mut text = format!(
        "mode: {}\ntrain subjects: {}\nvalidation subjects: {}\nepochs run: {}\nbest epoch: {}\nbest validation {}: {:.6}\n",
        match mode {
            Mode::Hazard => "hazard",
            Mode::Classify => "classify",
        },
        std.train.len(),
        std.others[0].len(),
        history.epochs.len() - 1,
        history.best_epoch,
        match history.metric {
            nn::ValidationMetric::Cindex => "c-index",
            nn::ValidationMetric::WeightedBce => "weighted BCE",
        },
        history.best_validation
    );
    if let Some(m) = history.median_time {
        let _ = writeln!(text, "median survival time: {m}");
    }
    let _ = writeln!(text, "checkpoint: {}", dir.join("checkpoint.txt").display());
    Ok(text)
}

fn synth(g: &GlobalArgs, spec: &SyntheticSpec) -> Result<String> {
    let cohort = harness::generate_synthetic(spec)?;
    let dir = out_dir_or_cwd(g)?;
    io::write_cohort(&cohort, &dir.join("features.csv"), &dir.join("survival.csv"))?;
    Ok(format!(
        "subjects: {}\nevents: {}\nfeatures: {}\nwritten: {}, {}\n",
        cohort.len(),
        cohort.n_events(),
        cohort.n_features(),
        dir.join("features.csv").display(),
        dir.join("survival.csv").display()
    ))
}

fn experiment(g: &GlobalArgs, config: &Path, notes: &mut String) -> Result<String> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = g.seed {
        cfg.split.master_seed = s;
    }
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    let cohort = match (&cfg.data, &cfg.synthetic) {
        (Some(data), None) => {
            let loaded = io::load_cohort(&data.features, &data.survival)?;
            report_unmatched(notes, &loaded.only_in_features, &data.features);
            report_unmatched(notes, &loaded.only_in_survival, &data.survival);
            loaded.cohort
        }
        (None, Some(spec)) => harness::generate_synthetic(spec)?,
        _ => return Err(Error::Config("exactly one of [data] or [synthetic] is required".into())),
    };
    let exp = harness::run_experiment(&cohort, &cfg.split, &cfg.pipeline_specs(), cfg.workers.max(1))?;
    let dir = out_dir_or_cwd(g)?;
    io::write_file(&dir.join("report.json"), &exp.to_json())?;
    io::write_file(&dir.join("summary.txt"), &exp.summary.render_text())?;
    io::write_file(&dir.join("summary.csv"), &exp.summary.render_csv())?;
    for r in &exp.reports {
        note_skips(notes, r);
    }
    if g.strict {
        if let Some(r) = exp.records.iter().find(|r| r.cox_converged == Some(false)) {
            let _ = writeln!(
                notes,
                "Cox fit did not converge in {} on repeat {}",
                r.pipeline, r.repeat_index
            );
            return Err(Error::NonConvergence { iterations: cfg.fit.max_iterations });
        }
    }
    Ok(exp.summary.render_text())
}

fn note_skips(notes: &mut String, r: &ExperimentReport) {
    if !r.skipped.is_empty() {
        let _ = writeln!(notes, "warning: {} skipped {} split(s)", r.pipeline, r.skipped.len());
    }
}
