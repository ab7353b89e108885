//! Censored survival primitives.

mod cohort;
mod concordance;
mod km;
mod weights;

pub use cohort::{Cohort, Subject};
pub use concordance::{concordance_index, concordance_index_raw, Concordance};
pub use km::{kaplan_meier, kaplan_meier_raw, median_survival, CurvePoint, SurvivalCurve};
pub use weights::{censoring_weights, median_class_labels, CensoringWeights};
