//! Independent reference implementations used as test oracles. Each one is
//! written the slow, obvious way and shares no code with the library.
#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use survclass::survival::{Cohort, Subject};

/// O(n²) enumeration over ordered pairs. `None` when nothing is comparable.
pub fn brute_cindex(scores: &[f64], times: &[f64], events: &[bool]) -> Option<f64> {
    let n = times.len();
    let mut concordant = 0.0;
    let mut comparable = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i == j || !events[i] || times[i] >= times[j] {
                continue;
            }
            comparable += 1;
            if scores[i] > scores[j] {
                concordant += 1.0;
            } else if scores[i] == scores[j] {
                concordant += 0.5;
            }
        }
    }
    (comparable > 0).then(|| concordant / comparable as f64)
}

/// Product-limit estimate at every distinct event time, counted directly.
pub fn brute_km(times: &[f64], events: &[bool]) -> Vec<(f64, f64)> {
    let mut event_times: Vec<f64> = times.iter().zip(events).filter(|(_, &e)| e).map(|(&t, _)| t).collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();
    event_times
        .iter()
        .map(|&t| {
            let s: f64 = event_times
                .iter()
                .filter(|&&u| u <= t)
                .map(|&u| {
                    let at_risk = times.iter().filter(|&&x| x >= u).count() as f64;
                    let died = times.iter().zip(events).filter(|(&x, &e)| e && x == u).count() as f64;
                    1.0 - died / at_risk
                })
                .product();
            (t, s)
        })
        .collect()
}

/// Breslow negative log partial likelihood, summing each risk set directly.
pub fn brute_npll(beta: &[f64], x: &[Vec<f64>], times: &[f64], events: &[bool]) -> f64 {
    let eta: Vec<f64> = x.iter().map(|r| r.iter().zip(beta).map(|(a, b)| a * b).sum()).collect();
    let mut total = 0.0;
    for i in 0..times.len() {
        if !events[i] {
            continue;
        }
        let risk: f64 = (0..times.len()).filter(|&j| times[j] >= times[i]).map(|j| eta[j].exp()).sum();
        total += risk.ln() - eta[i];
    }
    total
}

/// Argmin of `f` over the grid lo, lo + step, ..., hi.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n {
        let b = lo + k as f64 * step;
        let v = f(b);
        if v < best.0 {
            best = (v, b);
        }
    }
    best.1
}

/// Central differences of a scalar function.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// Central differences of a vector function; row k = d f / d x_k.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            f(&up).iter().zip(f(&down)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect()
}

/// |a - b| / max(|a|, |b|, floor).
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Mid-ranks by counting, then the textbook Pearson formula.
pub fn rank_pearson(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&x| {
                let below = v.iter().filter(|&&y| y < x).count() as f64;
                let equal = v.iter().filter(|&&y| y == x).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va.sqrt() * vb.sqrt())
}

/// Network output recomputed from the public layer parameters.
#[allow(clippy::needless_range_loop)]
pub fn manual_forward(net: &survclass::nn::DenseNet, x: &[f64]) -> (f64, Vec<Vec<f64>>) {
    let mut current = x.to_vec();
    let mut hidden = Vec::new();
    let layers = net.layers();
    for (li, layer) in layers.iter().enumerate() {
        let mut next = vec![0.0; layer.outputs];
        for o in 0..layer.outputs {
            let mut z = layer.bias[o];
            for i in 0..layer.inputs {
                z += layer.weights[o * layer.inputs + i] * current[i];
            }
            next[o] = if li + 1 < layers.len() { z.max(0.0) } else { z };
        }
        if li + 1 < layers.len() {
            hidden.push(next.clone());
        }
        current = next;
    }
    (current[0], hidden)
}

/// Monte-Carlo c-index of the true log hazard under the synthetic generative
/// model (x ~ N(0, I), exponential event and censoring times), estimated from
/// independently drawn pairs.
pub fn monte_carlo_true_cindex(beta: &[f64], baseline_rate: f64, censoring_rate: f64, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha20Rng| {
        let eta: f64 = beta.iter().map(|b| b * normal(rng)).sum();
        let t = exponential(rng, baseline_rate * eta.exp());
        let c = exponential(rng, censoring_rate);
        (eta, t.min(c), t <= c)
    };
    let (mut conc, mut comp) = (0.0, 0.0);
    for _ in 0..pairs {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        for (i, j) in [(a, b), (b, a)] {
            if i.2 && i.1 < j.1 {
                comp += 1.0;
                if i.0 > j.0 {
                    conc += 1.0;
                }
            }
        }
    }
    conc / comp
}

fn normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random::<f64>();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn exponential(rng: &mut impl Rng, rate: f64) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() / rate
}

pub fn cohort(x: Vec<Vec<f64>>, times: &[f64], events: &[bool]) -> Cohort {
    let p = x.first().map_or(0, Vec::len);
    let subjects = x
        .into_iter()
        .enumerate()
        .map(|(i, r)| Subject::new(format!("s{i:03}"), times[i], events[i], r))
        .collect();
    Cohort::new(subjects, (0..p).map(|k| format!("x{k}")).collect()).unwrap()
}

/// Times on a coarse grid so that ties occur.
pub fn tied_times(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((1u32..=12).prop_map(f64::from), n)
}

/// Random cohort with `n` in `sizes`, `p` in `1..=max_p`, continuous times
/// that may tie, and at least one event.
pub fn arb_cohort(sizes: std::ops::RangeInclusive<usize>, max_p: usize) -> impl Strategy<Value = Cohort> {
    (sizes, 1..=max_p)
        .prop_flat_map(|(n, p)| {
            (
                prop::collection::vec(prop::collection::vec(-2.0f64..2.0, p), n),
                prop::collection::vec(prop_oneof![(1u32..=20).prop_map(f64::from), 0.1f64..20.0], n),
                prop::collection::vec(prop::bool::weighted(0.7), n),
            )
        })
        .prop_filter("needs an event", |(_, _, e)| e.iter().any(|&v| v))
        .prop_map(|(x, t, e)| cohort(x, &t, &e))
}
