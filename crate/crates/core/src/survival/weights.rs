use super::Cohort;
use crate::error::{Error, Result};

/// Per-subject loss weights for median-survival classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoringWeights {
    pub weights: Vec<f64>,
    pub median_time: f64,
}

/// w = 1 when `median_time <= time`, otherwise w = event.
///
/// Subjects censored before the median get weight 0: their class is unknown.
pub fn censoring_weights(cohort: &Cohort, median_time: f64) -> Result<CensoringWeights> {
    check_median(median_time)?;
    let weights = cohort
        .subjects()
        .iter()
        .map(|s| {
            if median_time <= s.time || s.event {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(CensoringWeights {
        weights,
        median_time,
    })
}

/// Class 1 when the subject lived strictly longer than `median_time`.
pub fn median_class_labels(cohort: &Cohort, median_time: f64) -> Result<Vec<u8>> {
    check_median(median_time)?;
    Ok(cohort
        .subjects()
        .iter()
        .map(|s| u8::from(s.time > median_time))
        .collect())
}

fn check_median(median_time: f64) -> Result<()> {
    if median_time.is_finite() && median_time > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "median time must be positive and finite, got {median_time}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cohort(times: &[f64], events: &[bool]) -> Cohort {
        Cohort::from_times(times, events).unwrap()
    }

    #[test]
    fn weight_cases() {
        let c = cohort(&[80.0, 40.0, 40.0, 60.0], &[false, false, true, false]);
        let w = censoring_weights(&c, 60.0).unwrap();
        assert_eq!(w.weights, vec![1.0, 0.0, 1.0, 1.0]);
        assert_eq!(w.median_time, 60.0);
    }

    #[test]
    fn labels_use_strict_comparison() {
        let c = cohort(&[72.0, 60.0, 10.0], &[true, true, true]);
        assert_eq!(median_class_labels(&c, 60.0).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn nonpositive_median_is_rejected() {
        let c = cohort(&[1.0], &[true]);
        assert!(censoring_weights(&c, 0.0).is_err());
        assert!(censoring_weights(&c, -3.0).is_err());
        assert!(median_class_labels(&c, f64::NAN).is_err());
    }
}
