use std::collections::HashSet;

use crate::error::{Error, Result};

/// One observed subject: follow-up time, event indicator and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub id: String,
    /// Time to event or to censoring, in whatever unit the caller uses.
    pub time: f64,
    /// `true` when the event was observed, `false` when right-censored.
    pub event: bool,
    pub features: Vec<f64>,
}

impl Subject {
    pub fn new(id: impl Into<String>, time: f64, event: bool, features: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            time,
            event,
            features,
        }
    }
}

/// An immutable, validated table of subjects sharing one feature layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    subjects: Vec<Subject>,
    feature_names: Vec<String>,
}

impl Cohort {
    /// Validates and builds a cohort.
    ///
    /// Rejects an empty subject list, duplicate ids, negative or non-finite
    /// times, non-finite feature values and feature vectors whose length
    /// differs from `feature_names`.
    pub fn new(subjects: Vec<Subject>, feature_names: Vec<String>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::invalid("cohort must contain at least one subject"));
        }
        let dim = feature_names.len();
        let mut seen = HashSet::with_capacity(subjects.len());
        for s in &subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::invalid(format!("duplicate subject id '{}'", s.id)));
            }
            if !(s.time.is_finite() && s.time >= 0.0) {
                return Err(Error::invalid(format!(
                    "subject '{}': time must be finite and >= 0, got {}",
                    s.id, s.time
                )));
            }
            if s.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.features.len(),
                });
            }
            if let Some(v) = s.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "subject '{}': non-finite feature value {v}",
                    s.id
                )));
            }
        }
        Ok(Self {
            subjects,
            feature_names,
        })
    }

    /// Builds a feature-less cohort from parallel time/event vectors.
    /// Ids are the zero-based positions.
    pub fn from_times(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: events.len(),
            });
        }
        let subjects = times
            .iter()
            .zip(events)
            .enumerate()
            .map(|(i, (&t, &e))| Subject::new(i.to_string(), t, e, Vec::new()))
            .collect();
        Self::new(subjects, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    /// Always `false`; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.time).collect()
    }

    pub fn events(&self) -> Vec<bool> {
        self.subjects.iter().map(|s| s.event).collect()
    }

    pub fn n_events(&self) -> usize {
        self.subjects.iter().filter(|s| s.event).count()
    }

    pub fn feature_column(&self, k: usize) -> Vec<f64> {
        self.subjects.iter().map(|s| s.features[k]).collect()
    }

    /// Row-major copy of the feature matrix.
    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        self.subjects.iter().map(|s| s.features.clone()).collect()
    }

    /// Sub-cohort holding the given positions, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let subjects = indices
            .iter()
            .map(|&i| {
                self.subjects
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("subject index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(subjects, self.feature_names.clone())
    }

    /// Same subjects restricted to the given feature columns.
    pub fn select_features(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::invalid(format!("feature index {bad} out of range")));
        }
        let names = columns.iter().map(|&c| self.feature_names[c].clone()).collect();
        let subjects = self
            .subjects
            .iter()
            .map(|s| Subject {
                features: columns.iter().map(|&c| s.features[c]).collect(),
                ..s.clone()
            })
            .collect();
        Self::new(subjects, names)
    }

    /// Same subjects and survival data with the feature matrix replaced.
    pub fn with_features(&self, rows: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if rows.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: rows.len(),
            });
        }
        let subjects = self
            .subjects
            .iter()
            .zip(rows)
            .map(|(s, features)| Subject {
                id: s.id.clone(),
                time: s.time,
                event: s.event,
                features,
            })
            .collect();
        Self::new(subjects, names)
    }
}
