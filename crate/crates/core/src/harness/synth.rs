use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::{Cohort, Subject};

/// Exponential proportional-hazards cohort with known coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    /// Coefficients of the signal features, which come first.
    pub beta_true: Vec<f64>,
    pub baseline_rate: f64,
    /// Rate of the independent exponential censoring time.
    pub censoring_rate: f64,
    /// Pure-noise features appended after the signal features.
    pub noise_features: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 800,
            beta_true: vec![1.0, -0.8, 0.6, -0.5, 0.4, -0.3],
            baseline_rate: 0.1,
            censoring_rate: 0.035,
            noise_features: 14,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn n_features(&self) -> usize {
        self.beta_true.len() + self.noise_features
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("synthetic cohort size must be >= 1"));
        }
        if !(self.baseline_rate > 0.0 && self.baseline_rate.is_finite()) {
            return Err(Error::invalid("baseline_rate must be positive"));
        }
        if !(self.censoring_rate > 0.0 && self.censoring_rate.is_finite()) {
            return Err(Error::invalid("censoring_rate must be positive"));
        }
        if self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("beta_true must be finite"));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        (0..self.beta_true.len())
            .map(|k| format!("signal{k}"))
            .chain((0..self.noise_features).map(|k| format!("noise{k}")))
            .collect()
    }
}

/// Draws a cohort: x ~ N(0, I); event time -ln(U) / (baseline_rate *
/// exp(beta'x)); censoring time -ln(V) / censoring_rate; observed time is the
/// minimum. Ids are `s` plus a zero-padded index so they sort in draw order.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Cohort> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = spec.n_features();
    let width = spec.n.to_string().len();
    let mut subjects = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let features: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let eta: f64 = spec.beta_true.iter().zip(&features).map(|(b, x)| b * x).sum();
        // 1 - U lies in (0, 1], so the logs stay finite
        let u: f64 = 1.0 - rng.random::<f64>();
        let v: f64 = 1.0 - rng.random::<f64>();
        let event_time = -u.ln() / (spec.baseline_rate * eta.exp());
        let censor_time = -v.ln() / spec.censoring_rate;
        let event = event_time <= censor_time;
        let time = event_time.min(censor_time);
        subjects.push(Subject::new(format!("s{i:0width$}"), time, event, features));
    }
    Cohort::new(subjects, spec.feature_names())
}

/// Ground-truth log hazards beta_true'x for a cohort laid out like
/// [`generate_synthetic`] output.
pub fn true_scores(spec: &SyntheticSpec, cohort: &Cohort) -> Vec<f64> {
    cohort
        .subjects()
        .iter()
        .map(|s| spec.beta_true.iter().zip(&s.features).map(|(b, x)| b * x).sum())
        .collect()
}
