//! Risk-set sweeps for the Breslow partial likelihood.
//!
//! Everything here works on linear predictors `eta` so the same code scores
//! a Cox model (eta = beta'x) and a network head (eta = net output).

use std::cmp::Ordering;

/// Running log-sum-exp with a moving shift.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    shift: f64,
    scaled: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    /// Adds `exp(v)`. Returns the factor previously accumulated sums must be
    /// multiplied by to stay relative to the new shift (1.0 if unchanged).
    pub(crate) fn push(&mut self, v: f64) -> f64 {
        if v > self.shift {
            let rescale = (self.shift - v).exp();
            self.scaled = self.scaled * rescale + 1.0;
            self.shift = v;
            rescale
        } else {
            self.scaled += (v - self.shift).exp();
            1.0
        }
    }

    pub(crate) fn shift(&self) -> f64 {
        self.shift
    }

    pub(crate) fn scaled(&self) -> f64 {
        self.scaled
    }

    pub(crate) fn value(&self) -> f64 {
        self.shift + self.scaled.ln()
    }
}

/// Groups of tied times, in descending time order. Each entry is the list of
/// subject positions sharing that time.
pub(crate) fn descending_groups(times: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| match times[b].total_cmp(&times[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if times[g[0]] == times[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Per-group log risk-set sums, aligned with `groups`.
pub(crate) fn log_risk_sums(eta: &[f64], groups: &[Vec<usize>]) -> Vec<f64> {
    let mut acc = LogSumExp::new();
    groups
        .iter()
        .map(|g| {
            for &i in g {
                acc.push(eta[i]);
            }
            acc.value()
        })
        .collect()
}

/// Negative Breslow partial log-likelihood of `eta`.
pub(crate) fn npll(eta: &[f64], events: &[bool], groups: &[Vec<usize>]) -> f64 {
    let log_sums = log_risk_sums(eta, groups);
    let mut loss = 0.0;
    for (g, &log_s0) in groups.iter().zip(&log_sums) {
        for &i in g {
            if events[i] {
                loss += log_s0 - eta[i];
            }
        }
    }
    loss
}

/// Loss and its gradient with respect to every entry of `eta`.
///
/// d/d eta_k = -event_k + exp(eta_k) * sum over event groups g with
/// T_g <= T_k of d_g / S0_g. The inner sum is kept in log space.
pub(crate) fn npll_with_eta_grad(
    eta: &[f64],
    events: &[bool],
    groups: &[Vec<usize>],
) -> (f64, Vec<f64>) {
    let log_sums = log_risk_sums(eta, groups);
    let mut loss = 0.0;
    let mut grad = vec![0.0; eta.len()];
    let mut log_cum_hazard = LogSumExp::new();
    // ascending time: the cumulative increments apply to later (longer) subjects
    for (g, &log_s0) in groups.iter().zip(&log_sums).rev() {
        let d = g.iter().filter(|&&i| events[i]).count();
        if d > 0 {
            log_cum_hazard.push((d as f64).ln() - log_s0);
        }
        for &i in g {
            if events[i] {
                loss += log_s0 - eta[i];
                grad[i] -= 1.0;
            }
            if log_cum_hazard.shift().is_finite() {
                grad[i] += (eta[i] + log_cum_hazard.value()).exp();
            }
        }
    }
    (loss, grad)
}

/// Cumulative Breslow hazard increments per event group, ascending time:
/// (time, d_g / S0_g).
pub(crate) fn breslow_increments(
    eta: &[f64],
    times: &[f64],
    events: &[bool],
    groups: &[Vec<usize>],
) -> Vec<(f64, f64)> {
    let log_sums = log_risk_sums(eta, groups);
    groups
        .iter()
        .zip(&log_sums)
        .rev()
        .filter_map(|(g, &log_s0)| {
            let d = g.iter().filter(|&&i| events[i]).count();
            (d > 0).then(|| (times[g[0]], ((d as f64).ln() - log_s0).exp()))
        })
        .collect()
}
