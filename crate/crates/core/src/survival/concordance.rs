use super::Cohort;
use crate::error::{Error, Result};

/// Raw pair counts behind a c-index value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concordance {
    /// Concordant pairs plus half of the score-tied pairs.
    pub concordant: f64,
    pub comparable: u64,
}

impl Concordance {
    pub fn value(&self) -> Result<f64> {
        if self.comparable == 0 {
            return Err(Error::UndefinedConcordance);
        }
        Ok(self.concordant / self.comparable as f64)
    }
}

/// Harrell's c-index of hazard scores (higher score = shorter survival).
///
/// A pair is comparable when the subject with the strictly shorter time had
/// an event. Tied scores on a comparable pair count one half; pairs with tied
/// times are never comparable.
pub fn concordance_index(scores: &[f64], cohort: &Cohort) -> Result<f64> {
    concordance_index_raw(scores, &cohort.times(), &cohort.events())?.value()
}

pub fn concordance_index_raw(scores: &[f64], times: &[f64], events: &[bool]) -> Result<Concordance> {
    if scores.len() != times.len() || events.len() != times.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("hazard scores must be finite"));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut twice_concordant: u64 = 0;
    let mut comparable: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let t = times[order[start]];
        let mut end = start;
        while end < order.len() && times[order[end]] == t {
            end += 1;
        }
        for &i in &order[start..end] {
            if !events[i] {
                continue;
            }
            for &j in &order[end..] {
                comparable += 1;
                twice_concordant += match scores[i].partial_cmp(&scores[j]) {
                    Some(std::cmp::Ordering::Greater) => 2,
                    Some(std::cmp::Ordering::Equal) => 1,
                    _ => 0,
                };
            }
        }
        start = end;
    }
    Ok(Concordance {
        concordant: twice_concordant as f64 / 2.0,
        comparable,
    })
}
