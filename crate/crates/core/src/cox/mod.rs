//! Cox proportional-hazards regression.
//!
//! The model is fitted by Newton-Raphson with step halving on the negative
//! Breslow partial log-likelihood
//!
//! ```text
//! -log L(beta) = - sum_{i: event} [ beta'x_i - log sum_{j: T_j >= T_i} exp(beta'x_j) ]
//! ```
//!
//! plus an optional tiny ridge term `ridge/2 * |beta|^2` for conditioning.
//! Tied event times share the full risk set (Breslow).

pub(crate) mod partial;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::Cohort;

use partial::{descending_groups, LogSumExp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Convergence threshold on the max-norm of the Newton update.
    pub tolerance: f64,
    /// L2 stabilizer added to the objective. Set to 0 for the exact MLE.
    pub ridge: f64,
    pub step_halving_max: usize,
    /// Fits whose Euclidean `|beta|` exceeds this are flagged as diverged
    /// (monotone likelihood, no finite MLE).
    pub divergence_bound: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-8,
            ridge: 1e-9,
            step_halving_max: 30,
            divergence_bound: 50.0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::invalid("fit tolerance must be > 0"));
        }
        if self.ridge.is_nan() || self.ridge < 0.0 {
            return Err(Error::invalid("ridge must be >= 0"));
        }
        if self.divergence_bound.is_nan() || self.divergence_bound <= 0.0 {
            return Err(Error::invalid("divergence bound must be > 0"));
        }
        Ok(())
    }
}

/// Breslow cumulative baseline hazard, a nondecreasing step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard {
    /// (event time, cumulative hazard just after it), ascending time.
    pub points: Vec<(f64, f64)>,
}

impl BaselineHazard {
    pub fn cumulative_at(&self, t: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(time, _)| *time <= t)
            .last()
            .map_or(0.0, |&(_, h)| h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxModel {
    pub beta: Vec<f64>,
    pub feature_names: Vec<String>,
    pub converged: bool,
    pub iterations: usize,
    /// Unpenalized negative partial log-likelihood at `beta`.
    pub final_nll: f64,
    pub baseline: Option<BaselineHazard>,
}

impl CoxModel {
    /// A model with fixed coefficients, for scoring with known weights.
    pub fn from_coefficients(beta: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        if beta.len() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: beta.len(),
            });
        }
        Ok(Self {
            beta,
            feature_names,
            converged: false,
            iterations: 0,
            final_nll: f64::NAN,
            baseline: None,
        })
    }

    pub fn hazard_score(&self, features: &[f64]) -> Result<f64> {
        hazard_score(self, features)
    }

    pub fn hazard_scores(&self, cohort: &Cohort) -> Result<Vec<f64>> {
        check_dim(&self.beta, cohort)?;
        Ok(cohort.subjects().iter().map(|s| dot(&self.beta, &s.features)).collect())
    }

    /// Attaches the Breslow baseline estimated on `cohort`.
    pub fn with_baseline(mut self, cohort: &Cohort) -> Result<Self> {
        self.baseline = Some(breslow_baseline(&self, cohort)?);
        Ok(self)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(beta: &[f64], cohort: &Cohort) -> Result<()> {
    if beta.len() != cohort.n_features() {
        return Err(Error::DimensionMismatch {
            expected: cohort.n_features(),
            found: beta.len(),
        });
    }
    Ok(())
}

fn linear_predictor(beta: &[f64], cohort: &Cohort) -> Vec<f64> {
    cohort.subjects().iter().map(|s| dot(beta, &s.features)).collect()
}

pub fn neg_partial_log_likelihood(beta: &[f64], cohort: &Cohort) -> Result<f64> {
    check_dim(beta, cohort)?;
    let groups = descending_groups(&cohort.times());
    Ok(partial::npll(&linear_predictor(beta, cohort), &cohort.events(), &groups))
}

/// Analytic gradient: sum over events of (risk-set weighted mean of x) - x_i.
pub fn npll_gradient(beta: &[f64], cohort: &Cohort) -> Result<Vec<f64>> {
    check_dim(beta, cohort)?;
    let groups = descending_groups(&cohort.times());
    let (_, eta_grad) =
        partial::npll_with_eta_grad(&linear_predictor(beta, cohort), &cohort.events(), &groups);
    let mut grad = vec![0.0; beta.len()];
    for (s, g) in cohort.subjects().iter().zip(eta_grad) {
        for (acc, x) in grad.iter_mut().zip(&s.features) {
            *acc += g * x;
        }
    }
    Ok(grad)
}

/// Analytic Hessian: sum over events of the risk-set weighted covariance of x.
pub fn npll_hessian(beta: &[f64], cohort: &Cohort) -> Result<Vec<Vec<f64>>> {
    check_dim(beta, cohort)?;
    let h = hessian_matrix(beta, cohort);
    Ok((0..h.nrows()).map(|r| h.row(r).iter().copied().collect()).collect())
}

fn hessian_matrix(beta: &[f64], cohort: &Cohort) -> DMatrix<f64> {
    let p = beta.len();
    let subjects = cohort.subjects();
    let groups = descending_groups(&cohort.times());
    let mut acc = LogSumExp::new();
    let mut s1 = DVector::<f64>::zeros(p);
    let mut s2 = DMatrix::<f64>::zeros(p, p);
    let mut hess = DMatrix::<f64>::zeros(p, p);
    for g in &groups {
        for &i in g {
            let x = DVector::from_column_slice(&subjects[i].features);
            let eta = dot(beta, &subjects[i].features);
            let rescale = acc.push(eta);
            if rescale != 1.0 {
                s1 *= rescale;
                s2 *= rescale;
            }
            let w = (eta - acc.shift()).exp();
            s1.axpy(w, &x, 1.0);
            s2.ger(w, &x, &x, 1.0);
        }
        let d = g.iter().filter(|&&i| subjects[i].event).count();
        if d > 0 {
            let s0 = acc.scaled();
            let mean = &s1 / s0;
            let cov = &s2 / s0 - &mean * mean.transpose();
            hess += cov * d as f64;
        }
    }
    hess
}

pub fn hazard_score(model: &CoxModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.beta.len() {
        return Err(Error::DimensionMismatch {
            expected: model.beta.len(),
            found: features.len(),
        });
    }
    Ok(dot(&model.beta, features))
}

/// Breslow estimate of the cumulative baseline hazard under `model`.
pub fn breslow_baseline(model: &CoxModel, cohort: &Cohort) -> Result<BaselineHazard> {
    check_dim(&model.beta, cohort)?;
    if model.beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::invalid("model coefficients are not finite"));
    }
    let times = cohort.times();
    let groups = descending_groups(&times);
    let incs = partial::breslow_increments(
        &linear_predictor(&model.beta, cohort),
        &times,
        &cohort.events(),
        &groups,
    );
    let mut cumulative = 0.0;
    let points = incs
        .into_iter()
        .map(|(t, inc)| {
            cumulative += inc;
            (t, cumulative)
        })
        .collect();
    Ok(BaselineHazard { points })
}

fn penalized(nll: f64, beta: &[f64], ridge: f64) -> f64 {
    nll + 0.5 * ridge * beta.iter().map(|b| b * b).sum::<f64>()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `h * x = g`, adding diagonal jitter when `h` is not numerically
/// positive definite.
fn newton_direction(h: DMatrix<f64>, g: &[f64]) -> Option<Vec<f64>> {
    let rhs = DVector::from_column_slice(g);
    let scale = h.diagonal().iter().fold(1e-12_f64, |m, v| m.max(v.abs()));
    for k in 0..8 {
        let mut hk = h.clone();
        if k > 0 {
            let jitter = scale * 10f64.powi(k - 12);
            for i in 0..hk.nrows() {
                hk[(i, i)] += jitter;
            }
        }
        if let Some(chol) = hk.cholesky() {
            let x = chol.solve(&rhs);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x.iter().copied().collect());
            }
        }
    }
    None
}

/// True when the observed information, rescaled to unit-variance features,
/// has a (numerically) zero eigenvalue at `beta`. That happens when the
/// likelihood keeps improving along some direction forever, so the stationary
/// point found is an underflow artifact rather than a finite MLE.
fn flat_information(beta: &[f64], cohort: &Cohort) -> bool {
    let h = hessian_matrix(beta, cohort);
    let n = cohort.len() as f64;
    let sd: Vec<f64> = (0..beta.len())
        .map(|k| {
            let col = cohort.feature_column(k);
            let mean = col.iter().sum::<f64>() / n;
            (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect();
    let scaled = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * sd[i] * sd[j]);
    let min_eig = scaled.symmetric_eigenvalues().min();
    min_eig < 1e-8 * cohort.n_events() as f64
}

/// Fits a Cox model to every feature of `cohort`, starting from beta = 0.
///
/// Running out of iterations or crossing `divergence_bound` is not an error:
/// the returned model has `converged == false`.
pub fn fit(cohort: &Cohort, config: &FitConfig) -> Result<CoxModel> {
    config.validate()?;
    if cohort.n_events() == 0 {
        return Err(Error::DegenerateDesign(
            "no uncensored subjects; the partial likelihood is empty".into(),
        ));
    }
    for k in 0..cohort.n_features() {
        let col = cohort.feature_column(k);
        if col.iter().all(|&v| v == col[0]) {
            return Err(Error::DegenerateDesign(format!(
                "feature '{}' has zero variance",
                cohort.feature_names()[k]
            )));
        }
    }

    let p = cohort.n_features();
    let times = cohort.times();
    let events = cohort.events();
    let groups = descending_groups(&times);
    let objective = |beta: &[f64]| {
        let nll = partial::npll(&linear_predictor(beta, cohort), &events, &groups);
        penalized(nll, beta, config.ridge)
    };

    let mut beta = vec![0.0; p];
    let mut current = objective(&beta);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let mut grad = npll_gradient(&beta, cohort)?;
        let mut hess = hessian_matrix(&beta, cohort);
        for k in 0..p {
            grad[k] += config.ridge * beta[k];
            hess[(k, k)] += config.ridge;
        }
        let Some(step) = newton_direction(hess, &grad) else {
            break;
        };

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=config.step_halving_max {
            let candidate: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b - scale * s).collect();
            let value = objective(&candidate);
            if value.is_finite() && value <= current + 1e-12 * current.abs().max(1.0) {
                accepted = Some((candidate, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, value)) = accepted else {
            // no descent along the Newton direction: numerically at the optimum
            converged = max_abs(&grad) < 1e-6;
            break;
        };
        let moved = scale * max_abs(&step);
        beta = next;
        current = value;
        if moved < config.tolerance {
            converged = true;
            break;
        }
        if beta.iter().map(|b| b * b).sum::<f64>().sqrt() > config.divergence_bound {
            break;
        }
    }

    if converged && flat_information(&beta, cohort) {
        converged = false;
    }
    let final_nll = partial::npll(&linear_predictor(&beta, cohort), &events, &groups);
    Ok(CoxModel {
        beta,
        feature_names: cohort.feature_names().to_vec(),
        converged,
        iterations,
        final_nll,
        baseline: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::Subject;

    fn cohort(rows: &[(f64, bool, &[f64])]) -> Cohort {
        let p = rows[0].2.len();
        let subjects = rows
            .iter()
            .enumerate()
            .map(|(i, (t, e, x))| Subject::new(format!("s{i}"), *t, *e, x.to_vec()))
            .collect();
        Cohort::new(subjects, (0..p).map(|k| format!("x{k}")).collect()).unwrap()
    }

    #[test]
    fn single_uncensored_subject_loss_and_gradient_vanish() {
        let c = cohort(&[(3.0, true, &[1.5, -2.0])]);
        for beta in [[0.0, 0.0], [3.0, -1.0], [40.0, 17.0]] {
            assert_eq!(neg_partial_log_likelihood(&beta, &c).unwrap(), 0.0);
            assert_eq!(npll_gradient(&beta, &c).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn zero_beta_three_events() {
        let c = cohort(&[(1.0, true, &[0.3]), (2.0, true, &[-1.0]), (3.0, true, &[2.0])]);
        let v = neg_partial_log_likelihood(&[0.0], &c).unwrap();
        assert!((v - 6f64.ln()).abs() < 1e-12);
        assert!((v - 1.791759).abs() < 1e-6);
    }

    #[test]
    fn all_censored_loss_is_zero_and_fit_fails() {
        let c = cohort(&[(1.0, false, &[0.3]), (2.0, false, &[-1.0])]);
        assert_eq!(neg_partial_log_likelihood(&[2.0], &c).unwrap(), 0.0);
        assert!(matches!(fit(&c, &FitConfig::default()), Err(Error::DegenerateDesign(_))));
    }

    #[test]
    fn two_subject_binary_covariate_gradient() {
        // beta = 0: event at t=1 sees risk set {x=1, x=0}, mean 0.5, so term = 0.5 - 1;
        // event at t=2 sees {x=0}, term = 0 - 0. Total -0.5.
        let c = cohort(&[(1.0, true, &[1.0]), (2.0, true, &[0.0])]);
        let g = npll_gradient(&[0.0], &c).unwrap();
        assert!((g[0] + 0.5).abs() < 1e-15);
        let h = npll_hessian(&[0.0], &c).unwrap();
        assert!((h[0][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let c = cohort(&[(1.0, true, &[1.0, 2.0])]);
        assert!(neg_partial_log_likelihood(&[1.0], &c).is_err());
        let m = CoxModel::from_coefficients(vec![1.0], vec!["a".into()]).unwrap();
        assert!(m.hazard_score(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn hazard_score_is_dot_product() {
        let m = CoxModel::from_coefficients(vec![1.0, -2.0], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(m.hazard_score(&[3.0, 1.0]).unwrap(), 1.0);
        let zero = CoxModel::from_coefficients(vec![0.0; 2], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(zero.hazard_score(&[5.0, -9.0]).unwrap(), 0.0);
        assert!(m.hazard_score(&[3.5, 1.0]).unwrap() > m.hazard_score(&[3.0, 1.0]).unwrap());
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let c = cohort(&[(1.0, true, &[1.0, 0.2]), (2.0, true, &[1.0, 0.5])]);
        assert!(matches!(fit(&c, &FitConfig::default()), Err(Error::DegenerateDesign(_))));
    }

    #[test]
    fn separable_design_is_flagged_not_looped() {
        // higher x always dies first: the likelihood increases without bound
        let c = cohort(&[
            (1.0, true, &[3.0]),
            (2.0, true, &[2.0]),
            (3.0, true, &[1.0]),
            (4.0, true, &[0.0]),
        ]);
        let m = fit(&c, &FitConfig { ridge: 0.0, ..FitConfig::default() }).unwrap();
        assert!(!m.converged, "{m:?}");
        assert!(m.beta[0] > 0.0);
    }

    #[test]
    fn breslow_zero_beta_increments() {
        let c = cohort(&[(1.0, true, &[0.1]), (2.0, true, &[0.7]), (3.0, true, &[-0.4]), (4.0, true, &[0.0])]);
        let m = CoxModel::from_coefficients(vec![0.0], vec!["x0".into()]).unwrap();
        let b = breslow_baseline(&m, &c).unwrap();
        let expected = [1.0 / 4.0, 1.0 / 4.0 + 1.0 / 3.0, 1.0 / 4.0 + 1.0 / 3.0 + 0.5, 1.0 / 4.0 + 1.0 / 3.0 + 1.5];
        for ((_, h), e) in b.points.iter().zip(expected) {
            assert!((h - e).abs() < 1e-12);
        }
    }

    #[test]
    fn breslow_without_events_is_zero() {
        let c = cohort(&[(1.0, false, &[0.1]), (2.0, false, &[0.7])]);
        let m = CoxModel::from_coefficients(vec![0.4], vec!["x0".into()]).unwrap();
        let b = breslow_baseline(&m, &c).unwrap();
        assert!(b.points.is_empty());
        assert_eq!(b.cumulative_at(10.0), 0.0);
    }
}
