//! Feature standardization and forward selection.
//!
//! Candidates are ranked by their univariate c-index and accepted greedily,
//! skipping any candidate whose Spearman correlation with an already accepted
//! feature exceeds the configured threshold in absolute value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::{concordance_index, Cohort};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Maximum allowed |rho| between two selected features, in (0, 1].
    pub correlation_threshold: f64,
    pub max_features: usize,
    /// Candidates scoring below this stop the search.
    pub min_univariate_cindex: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            correlation_threshold: 0.8,
            max_features: 10,
            min_univariate_cindex: 0.5,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.correlation_threshold > 0.0 && self.correlation_threshold <= 1.0) {
            return Err(Error::invalid("correlation threshold must lie in (0, 1]"));
        }
        if self.max_features == 0 {
            return Err(Error::invalid("max_features must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub train: Cohort,
    pub others: Vec<Cohort>,
    pub means: Vec<f64>,
    /// Population standard deviations of the training columns.
    pub stds: Vec<f64>,
    /// Columns with zero training variance; mapped to 0 everywhere.
    pub constant: Vec<usize>,
}

/// Centers and scales every feature with training-set statistics and applies
/// the same affine map to `others`.
pub fn standardize(train: &Cohort, others: &[&Cohort]) -> Result<Standardized> {
    let p = train.n_features();
    let n = train.len() as f64;
    let mut means = vec![0.0; p];
    let mut stds = vec![0.0; p];
    for k in 0..p {
        let col = train.feature_column(k);
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        means[k] = mean;
        stds[k] = var.sqrt();
    }
    let constant: Vec<usize> = (0..p).filter(|&k| stds[k].is_nan() || stds[k] <= 0.0).collect();

    let apply = |c: &Cohort| -> Result<Cohort> {
        if c.n_features() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: c.n_features(),
            });
        }
        let rows = c
            .subjects()
            .iter()
            .map(|s| {
                s.features
                    .iter()
                    .enumerate()
                    .map(|(k, v)| if stds[k] > 0.0 { (v - means[k]) / stds[k] } else { 0.0 })
                    .collect()
            })
            .collect();
        c.with_features(rows, c.feature_names().to_vec())
    };

    Ok(Standardized {
        train: apply(train)?,
        others: others.iter().map(|c| apply(c)).collect::<Result<_>>()?,
        means,
        stds,
        constant,
    })
}

/// Mid-ranks (1-based, ties averaged).
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = mid;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson correlation of mid-ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::invalid("spearman correlation needs at least two values"));
    }
    pearson(&ranks(a), &ranks(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateCindex {
    /// max(C(feature), C(-feature)), always >= 0.5.
    pub cindex: f64,
    /// +1 when larger values mean higher hazard, -1 when they are protective.
    pub sign: f64,
}

pub fn univariate_cindex(feature: &[f64], cohort: &Cohort) -> Result<UnivariateCindex> {
    if feature.len() != cohort.len() {
        return Err(Error::DimensionMismatch {
            expected: cohort.len(),
            found: feature.len(),
        });
    }
    let up = concordance_index(feature, cohort)?;
    let negated: Vec<f64> = feature.iter().map(|v| -v).collect();
    let down = concordance_index(&negated, cohort)?;
    Ok(if up >= down {
        UnivariateCindex { cindex: up, sign: 1.0 }
    } else {
        UnivariateCindex { cindex: down, sign: -1.0 }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    /// Selected feature with the largest |rho| against `index`.
    pub conflicting_index: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Accepted feature indices in acceptance order.
    pub selected: Vec<usize>,
    /// Univariate c-index per feature (0.5 for constant features).
    pub univariate_cindex: Vec<f64>,
    pub rejected_for_correlation: Vec<Rejection>,
    /// Constant columns, never eligible.
    pub skipped_constant: Vec<usize>,
}

/// Greedy forward selection on `cohort`'s features.
///
/// Candidates are visited in descending univariate c-index (ties: lower index
/// first). The search stops at `max_features`, when candidates run out, or at
/// the first candidate below `min_univariate_cindex`.
pub fn forward_select(cohort: &Cohort, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate()?;
    let p = cohort.n_features();
    if p == 0 {
        return Err(Error::invalid("forward selection needs at least one feature"));
    }
    let columns: Vec<Vec<f64>> = (0..p).map(|k| cohort.feature_column(k)).collect();
    let mut univariate = vec![0.5; p];
    let mut skipped_constant = Vec::new();
    for (k, col) in columns.iter().enumerate() {
        if col.iter().all(|&v| v == col[0]) {
            skipped_constant.push(k);
        } else {
            univariate[k] = univariate_cindex(col, cohort)?.cindex;
        }
    }

    let mut candidates: Vec<usize> = (0..p).filter(|k| !skipped_constant.contains(k)).collect();
    candidates.sort_by(|&a, &b| univariate[b].total_cmp(&univariate[a]).then(a.cmp(&b)));

    let ranked: Vec<Option<Vec<f64>>> = (0..p)
        .map(|k| (!skipped_constant.contains(&k)).then(|| ranks(&columns[k])))
        .collect();

    let mut selected: Vec<usize> = Vec::new();
    let mut rejected = Vec::new();
    for k in candidates {
        if selected.len() >= config.max_features || univariate[k] < config.min_univariate_cindex {
            break;
        }
        let rk = ranked[k].as_ref().expect("non-constant column has ranks");
        let mut worst: Option<(usize, f64)> = None;
        for &s in &selected {
            let rho = pearson(rk, ranked[s].as_ref().expect("selected column has ranks"))?;
            if worst.is_none_or(|(_, r)| rho.abs() > r.abs()) {
                worst = Some((s, rho));
            }
        }
        match worst {
            Some((s, rho)) if rho.abs() > config.correlation_threshold => rejected.push(Rejection {
                index: k,
                conflicting_index: s,
                rho,
            }),
            _ => selected.push(k),
        }
    }

    Ok(SelectionResult {
        selected,
        univariate_cindex: univariate,
        rejected_for_correlation: rejected,
        skipped_constant,
    })
}
