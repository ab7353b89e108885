use serde::{Deserialize, Serialize};

use super::Cohort;
use crate::error::{Error, Result};

/// One drop of the product-limit step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub time: f64,
    /// S(t) just after `time`.
    pub survival: f64,
    /// Subjects with follow-up time >= `time`.
    pub at_risk: usize,
    pub events: usize,
}

/// Kaplan-Meier estimate: one point per distinct event time, times strictly
/// increasing. S(t) = 1 before the first point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub points: Vec<CurvePoint>,
}

impl SurvivalCurve {
    /// Right-continuous evaluation of S at `t`.
    pub fn survival_at(&self, t: f64) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.time <= t)
            .last()
            .map_or(1.0, |p| p.survival)
    }
}

pub fn kaplan_meier(cohort: &Cohort) -> Result<SurvivalCurve> {
    kaplan_meier_raw(&cohort.times(), &cohort.events())
}

/// Product-limit estimator over parallel time/event slices.
///
/// Censoring times shrink the risk set but add no point.
pub fn kaplan_meier_raw(times: &[f64], events: &[bool]) -> Result<SurvivalCurve> {
    if times.is_empty() {
        return Err(Error::invalid("Kaplan-Meier needs at least one subject"));
    }
    if times.len() != events.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: events.len(),
        });
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut points = Vec::new();
    let mut at_risk = times.len();
    let mut survival = 1.0;
    let mut i = 0;
    while i < order.len() {
        let t = times[order[i]];
        let mut j = i;
        let mut d = 0;
        while j < order.len() && times[order[j]] == t {
            d += usize::from(events[order[j]]);
            j += 1;
        }
        if d > 0 {
            survival *= 1.0 - d as f64 / at_risk as f64;
            points.push(CurvePoint {
                time: t,
                survival,
                at_risk,
                events: d,
            });
        }
        at_risk -= j - i;
        i = j;
    }
    Ok(SurvivalCurve { points })
}

// Products like 3/4 * 2/3 land a few ulps either side of 0.5.
const MEDIAN_SLACK: f64 = 1e-12;

/// Smallest event time with S(t) <= 0.5, or `None` if the curve never gets there.
pub fn median_survival(curve: &SurvivalCurve) -> Option<f64> {
    curve
        .points
        .iter()
        .find(|p| p.survival <= 0.5 + MEDIAN_SLACK)
        .map(|p| p.time)
}
