//! Rolling monthly timelines and group-mean deviations.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::{derive_seed, mean, quantile};
use crate::trust::YearMonth;

/// One smoothed timeline point: the rolling mean, its bootstrap CI, and
/// the number of documents in the window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeriesPoint {
    pub period: YearMonth,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Monthly micro-averages smoothed with a centered rolling window.
///
/// Scores are bucketed by calendar month; the point estimate for a month
/// is the unweighted mean of the available monthly means inside the
/// window (3 months by default, truncated at the edges). The CI comes
/// from resampling scores within each window month and re-averaging,
/// `n_iter` times, seeded deterministically per month.
pub fn rolling_timeline(
    items: &[(DateTime<Utc>, f64)],
    window_months: usize,
    n_iter: usize,
    seed: u64,
) -> Vec<TimeSeriesPoint> {
    assert!(window_months % 2 == 1, "window must be centered (odd)");
    if items.is_empty() {
        return Vec::new();
    }
    let mut buckets: BTreeMap<YearMonth, Vec<f64>> = BTreeMap::new();
    for (ts, score) in items {
        buckets.entry(YearMonth::of(ts)).or_default().push(*score);
    }
    let months: Vec<YearMonth> = buckets.keys().copied().collect();
    let half = window_months / 2;

    let window_of = |m: YearMonth| -> Vec<&Vec<f64>> {
        let mut lo = m;
        for _ in 0..half {
            lo = lo.prev();
        }
        let mut out = Vec::new();
        let mut cur = lo;
        for _ in 0..window_months {
            if let Some(scores) = buckets.get(&cur) {
                out.push(scores);
            }
            cur = cur.next();
        }
        out
    };

    months
        .par_iter()
        .enumerate()
        .map(|(mi, &month)| {
            let window = window_of(month);
            let point = mean(&window.iter().map(|s| mean(s)).collect::<Vec<f64>>());
            let n: usize = window.iter().map(|s| s.len()).sum();
            let draws: Vec<f64> = (0..n_iter)
                .map(|it| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        seed,
                        "timeline",
                        ((mi as u64) << 32) | it as u64,
                    ));
                    let month_means: Vec<f64> = window
                        .iter()
                        .map(|scores| {
                            let k = scores.len();
                            let resampled: f64 =
                                (0..k).map(|_| scores[rng.gen_range(0..k)]).sum();
                            resampled / k as f64
                        })
                        .collect();
                    mean(&month_means)
                })
                .collect();
            TimeSeriesPoint {
                period: month,
                mean: point,
                ci_low: quantile(&draws, 0.025),
                ci_high: quantile(&draws, 0.975),
                n,
            }
        })
        .collect()
}

/// Per-group deviation of the mean from the overall mean:
/// `<score>_group - <score>_all`. Size-weighted deviations sum to zero.
pub fn group_mean_deviation<K: Ord + Clone>(
    scores: &[f64],
    groups: &[K],
) -> BTreeMap<K, f64> {
    assert_eq!(scores.len(), groups.len(), "scores and groups must align");
    let overall = mean(scores);
    let mut sums: BTreeMap<K, (f64, usize)> = BTreeMap::new();
    for (score, group) in scores.iter().zip(groups) {
        let entry = sums.entry(group.clone()).or_insert((0.0, 0));
        entry.0 += score;
        entry.1 += 1;
    }
    sums.into_iter()
        .map(|(group, (sum, count))| (group, sum / count as f64 - overall))
        .collect()
}
