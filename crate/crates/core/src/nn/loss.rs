use super::net::{DenseNet, Gradients, Head};
use crate::cox::partial;
use crate::error::{Error, Result};
use crate::survival::Cohort;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `weight * BCE(sigmoid(logit), label)` in the overflow-free logit form.
pub fn weighted_bce(logit: f64, label: u8, weight: f64) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let y = f64::from(label);
    weight * (logit.max(0.0) - logit * y + (-logit.abs()).exp().ln_1p())
}

fn weighted_bce_derivative(logit: f64, label: u8, weight: f64) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    weight * (sigmoid(logit) - f64::from(label))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxBatchLoss {
    pub value: f64,
    /// Set when the batch holds no uncensored subject; `value` is then 0.
    pub degenerate: bool,
}

/// Flat view of a set of subjects used by the training loop.
pub(crate) struct Rows<'a> {
    pub(crate) features: Vec<&'a [f64]>,
    pub(crate) times: Vec<f64>,
    pub(crate) events: Vec<bool>,
}

impl<'a> Rows<'a> {
    pub(crate) fn from_cohort(cohort: &'a Cohort) -> Self {
        Self {
            features: cohort.subjects().iter().map(|s| s.features.as_slice()).collect(),
            times: cohort.times(),
            events: cohort.events(),
        }
    }
}

fn require_head(net: &DenseNet, head: Head) -> Result<()> {
    if net.head() != head {
        return Err(Error::invalid(format!(
            "loss needs a {} head, network has {}",
            head.as_str(),
            net.head().as_str()
        )));
    }
    Ok(())
}

fn check_rows(net: &DenseNet, rows: &Rows<'_>) -> Result<()> {
    match rows.features.iter().find(|x| x.len() != net.input_dim()) {
        Some(x) => Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            found: x.len(),
        }),
        None => Ok(()),
    }
}

/// In-batch Cox loss over `idx`, optionally with parameter gradients.
pub(crate) fn cox_indexed(
    net: &DenseNet,
    rows: &Rows<'_>,
    idx: &[usize],
    want_grad: bool,
) -> (CoxBatchLoss, Option<Gradients>) {
    let events: Vec<bool> = idx.iter().map(|&i| rows.events[i]).collect();
    let degenerate = !events.iter().any(|&e| e);
    if degenerate {
        let grads = want_grad.then(|| Gradients::zeros_like(net));
        return (CoxBatchLoss { value: 0.0, degenerate }, grads);
    }
    let times: Vec<f64> = idx.iter().map(|&i| rows.times[i]).collect();
    let groups = partial::descending_groups(&times);
    if !want_grad {
        let eta: Vec<f64> = idx.iter().map(|&i| net.output_unchecked(rows.features[i])).collect();
        let value = partial::npll(&eta, &events, &groups);
        return (CoxBatchLoss { value, degenerate }, None);
    }
    let traces: Vec<_> = idx.iter().map(|&i| net.trace(rows.features[i])).collect();
    let eta: Vec<f64> = traces.iter().map(|t| t.post.last().unwrap()[0]).collect();
    let (value, d_eta) = partial::npll_with_eta_grad(&eta, &events, &groups);
    let mut grads = Gradients::zeros_like(net);
    for ((&i, trace), d) in idx.iter().zip(&traces).zip(d_eta) {
        net.backprop_into(rows.features[i], trace, d, &mut grads);
    }
    (CoxBatchLoss { value, degenerate }, Some(grads))
}

/// Weighted-mean BCE over `idx`: sum(w_i * l_i) / sum(w_i), 0 when all
/// weights are 0. Zero-weight subjects contribute exactly nothing.
pub(crate) fn bce_indexed(
    net: &DenseNet,
    features: &[&[f64]],
    labels: &[u8],
    weights: &[f64],
    idx: &[usize],
    want_grad: bool,
) -> (f64, Option<Gradients>) {
    let total_weight: f64 = idx.iter().map(|&i| weights[i]).sum();
    let mut grads = want_grad.then(|| Gradients::zeros_like(net));
    if total_weight == 0.0 {
        return (0.0, grads);
    }
    let mut loss = 0.0;
    for &i in idx {
        if weights[i] == 0.0 {
            continue;
        }
        match grads.as_mut() {
            Some(g) => {
                let trace = net.trace(features[i]);
                let logit = trace.post.last().unwrap()[0];
                loss += weighted_bce(logit, labels[i], weights[i]);
                let d = weighted_bce_derivative(logit, labels[i], weights[i]) / total_weight;
                net.backprop_into(features[i], &trace, d, g);
            }
            None => {
                loss += weighted_bce(net.output_unchecked(features[i]), labels[i], weights[i]);
            }
        }
    }
    (loss / total_weight, grads)
}

/// Cox negative partial log-likelihood of the network outputs, with risk
/// sets formed among the subjects of `batch` only.
pub fn cox_batch_loss(net: &DenseNet, batch: &Cohort) -> Result<CoxBatchLoss> {
    require_head(net, Head::HazardLinear)?;
    let rows = Rows::from_cohort(batch);
    check_rows(net, &rows)?;
    let idx: Vec<usize> = (0..batch.len()).collect();
    Ok(cox_indexed(net, &rows, &idx, false).0)
}

pub fn cox_batch_gradients(net: &DenseNet, batch: &Cohort) -> Result<(CoxBatchLoss, Gradients)> {
    require_head(net, Head::HazardLinear)?;
    let rows = Rows::from_cohort(batch);
    check_rows(net, &rows)?;
    let idx: Vec<usize> = (0..batch.len()).collect();
    let (loss, grads) = cox_indexed(net, &rows, &idx, true);
    Ok((loss, grads.expect("gradients requested")))
}

fn check_bce_inputs(net: &DenseNet, batch: &Cohort, labels: &[u8], weights: &[f64]) -> Result<()> {
    require_head(net, Head::ClassLogit)?;
    check_rows(net, &Rows::from_cohort(batch))?;
    if labels.len() != batch.len() || weights.len() != batch.len() {
        return Err(Error::DimensionMismatch {
            expected: batch.len(),
            found: labels.len().min(weights.len()),
        });
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::invalid("class labels must be 0 or 1"));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::invalid("loss weights must be finite and >= 0"));
    }
    Ok(())
}

pub fn bce_batch_loss(net: &DenseNet, batch: &Cohort, labels: &[u8], weights: &[f64]) -> Result<f64> {
    check_bce_inputs(net, batch, labels, weights)?;
    let features: Vec<&[f64]> = batch.subjects().iter().map(|s| s.features.as_slice()).collect();
    let idx: Vec<usize> = (0..batch.len()).collect();
    Ok(bce_indexed(net, &features, labels, weights, &idx, false).0)
}

pub fn bce_batch_gradients(
    net: &DenseNet,
    batch: &Cohort,
    labels: &[u8],
    weights: &[f64],
) -> Result<(f64, Gradients)> {
    check_bce_inputs(net, batch, labels, weights)?;
    let features: Vec<&[f64]> = batch.subjects().iter().map(|s| s.features.as_slice()).collect();
    let idx: Vec<usize> = (0..batch.len()).collect();
    let (loss, grads) = bce_indexed(net, &features, labels, weights, &idx, true);
    Ok((loss, grads.expect("gradients requested")))
}
