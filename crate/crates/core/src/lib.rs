//! Censored survival analysis toolkit.
//!
//! The crate covers the full path from a table of subjects to an aggregated
//! benchmark report:
//!
//! - [`survival`]: cohorts, Kaplan-Meier curves, median survival, Harrell's
//!   concordance index and the censoring weights used to train median-survival
//!   classifiers.
//! - [`cox`]: Cox proportional-hazards fitting by Newton-Raphson on the
//!   negative partial log-likelihood (Breslow ties).
//! - [`select`]: standardization, Spearman correlation and forward feature
//!   selection by univariate c-index.
//! - [`nn`]: a small dense network trained either as a hazard predictor
//!   (in-batch Cox loss) or as a median-survival classifier (weighted binary
//!   cross-entropy), with hidden-activation extraction.
//! - [`harness`]: synthetic cohorts, stratified repeated splits, the pipeline
//!   variants and mean ± std aggregation.
//! - [`io`]: CSV ingestion, experiment configuration and report files.
//!
//! ```
//! use survclass::survival::{kaplan_meier, median_survival, Cohort, Subject};
//!
//! let subjects = vec![
//!     Subject::new("a", 2.0, true, vec![0.1]),
//!     Subject::new("b", 4.0, true, vec![0.3]),
//!     Subject::new("c", 6.0, false, vec![-0.2]),
//! ];
//! let cohort = Cohort::new(subjects, vec!["x".into()]).unwrap();
//! let curve = kaplan_meier(&cohort).unwrap();
//! assert_eq!(median_survival(&curve), Some(4.0));
//! ```

pub mod cli;
pub mod cox;
pub mod error;
pub mod harness;
pub mod io;
pub mod nn;
pub mod select;
pub mod survival;

pub use error::{DataError, Error, Result};
