use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::seed::{derive_seed, Stage};
use crate::error::{Error, Result};
use crate::survival::Cohort;

/// Repeated random train/validation/test splits stratified on the event
/// indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitPlan {
    pub n_repeats: usize,
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub master_seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            n_repeats: 100,
            train_fraction: 0.60,
            val_fraction: 0.15,
            test_fraction: 0.25,
            master_seed: 0,
        }
    }
}

impl SplitPlan {
    pub fn fractions(&self) -> [f64; 3] {
        [self.train_fraction, self.val_fraction, self.test_fraction]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_repeats == 0 {
            return Err(Error::invalid("n_repeats must be >= 1"));
        }
        let f = self.fractions();
        if f.iter().any(|v| v.is_nan() || *v < 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("split fractions must be >= 0 and sum to 1"));
        }
        Ok(())
    }
}

/// Subject positions of one split, each partition in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Partition {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.train, &self.val, &self.test]
    }

    /// Materializes the partitions; empty ones come back as `None`.
    pub fn cohorts(&self, cohort: &Cohort) -> Result<(Cohort, Option<Cohort>, Option<Cohort>)> {
        let sub = |idx: &[usize]| -> Result<Option<Cohort>> {
            if idx.is_empty() {
                Ok(None)
            } else {
                cohort.subset(idx).map(Some)
            }
        };
        let train = sub(&self.train)?.ok_or_else(|| Error::invalid("training partition is empty"))?;
        Ok((train, sub(&self.val)?, sub(&self.test)?))
    }
}

/// Largest-remainder apportionment of `m` items by `fractions`; ties in the
/// remainder go to the earlier partition.
fn apportion(m: usize, fractions: [f64; 3]) -> [usize; 3] {
    let quotas = fractions.map(|f| m as f64 * f);
    let mut sizes = quotas.map(|q| (q + 1e-9).floor() as usize);
    let assigned: usize = sizes.iter().sum();
    let mut by_remainder = [0, 1, 2];
    by_remainder.sort_by(|&a, &b| {
        let ra = quotas[a] - sizes[a] as f64;
        let rb = quotas[b] - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in by_remainder.iter().take(m.saturating_sub(assigned)) {
        sizes[k] += 1;
    }
    sizes
}

/// Split number `repeat_index` of `plan`.
///
/// Within each event stratum subjects are shuffled with a seed derived from
/// `(master_seed, repeat_index)` and cut by largest-remainder sizes, so each
/// partition's event count is within one subject of its ideal share.
pub fn stratified_split(cohort: &Cohort, plan: &SplitPlan, repeat_index: usize) -> Result<Partition> {
    plan.validate()?;
    let fractions = plan.fractions();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.master_seed, repeat_index as u64, Stage::Split));
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (name, flag) in [("events", true), ("censored", false)] {
        let mut stratum: Vec<usize> = (0..cohort.len())
            .filter(|&i| cohort.subjects()[i].event == flag)
            .collect();
        if stratum.is_empty() {
            continue;
        }
        let sizes = apportion(stratum.len(), fractions);
        if sizes.iter().zip(fractions).any(|(&s, f)| f > 0.0 && s == 0) {
            return Err(Error::StratumTooSmall {
                stratum: name.to_string(),
                size: stratum.len(),
            });
        }
        stratum.shuffle(&mut rng);
        let mut start = 0;
        for (part, size) in parts.iter_mut().zip(sizes) {
            part.extend_from_slice(&stratum[start..start + size]);
            start += size;
        }
    }
    let [mut train, mut val, mut test] = parts;
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(Partition { train, val, test })
}
