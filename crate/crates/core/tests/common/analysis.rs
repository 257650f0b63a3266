//! Test-only statistics used to check the structure of a synthetic
//! ensemble: rank quantiles, 1-D two-means silhouette, and exhaustive
//! depth-2 decision trees.

use std::collections::BTreeSet;

/// Indices of the `round(q·n)` smallest values (ties broken by index).
pub fn lowest_fraction(values: &[f64], q: f64) -> BTreeSet<usize> {
    let k = (q * values.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order.into_iter().take(k).collect()
}

/// Best 1-D two-means split of `values` (by within-cluster sum of squares)
/// and its mean silhouette. Returns `(silhouette, labels)` where label is
/// `true` for the upper cluster.
pub fn two_means_silhouette(values: &[f64]) -> (f64, Vec<bool>) {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sse = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    let split = (1..sorted.len())
        .min_by(|&a, &b| (sse(&sorted[..a]) + sse(&sorted[a..])).total_cmp(&(sse(&sorted[..b]) + sse(&sorted[b..]))))
        .expect("at least two values");
    let threshold = sorted[split - 1];
    let labels: Vec<bool> = values.iter().map(|v| *v > threshold).collect();

    let mut total = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let mean_dist = |same: bool| {
            let others: Vec<f64> = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && labels[j] == (labels[i] == same))
                .map(|(_, &w)| (w - v).abs())
                .collect();
            (others.iter().sum::<f64>(), others.len())
        };
        let (a_sum, a_n) = mean_dist(true);
        let (b_sum, b_n) = mean_dist(false);
        if a_n == 0 {
            continue; // singleton cluster: silhouette 0
        }
        let a = a_sum / a_n as f64;
        let b = b_sum / b_n as f64;
        total += (b - a) / a.max(b);
    }
    (total / values.len() as f64, labels)
}

fn majority(labels: &[u32], idx: &[usize]) -> usize {
    let mut counts = std::collections::BTreeMap::new();
    for &i in idx {
        *counts.entry(labels[i]).or_insert(0usize) += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

/// Candidate thresholds: midpoints between consecutive distinct values.
fn thresholds(features: &[[f64; 2]], idx: &[usize], f: usize) -> Vec<f64> {
    let mut v: Vec<f64> = idx.iter().map(|&i| features[i][f]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Correct predictions of the best single split (or no split) on `idx`.
fn best_stump(features: &[[f64; 2]], labels: &[u32], idx: &[usize]) -> usize {
    let mut best = majority(labels, idx);
    for f in 0..2 {
        for t in thresholds(features, idx, f) {
            let (lo, hi): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| features[i][f] <= t);
            best = best.max(majority(labels, &lo) + majority(labels, &hi));
        }
    }
    best
}

/// Training accuracy of the best axis-aligned tree of depth ≤ 2 on two
/// features, found by exhaustive search.
pub fn depth2_tree_accuracy(features: &[[f64; 2]], labels: &[u32]) -> f64 {
    let all: Vec<usize> = (0..labels.len()).collect();
    let mut best = best_stump(features, labels, &all);
    for f in 0..2 {
        for t in thresholds(features, &all, f) {
            let (lo, hi): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| features[i][f] <= t);
            best = best.max(best_stump(features, labels, &lo) + best_stump(features, labels, &hi));
        }
    }
    best as f64 / labels.len() as f64
}

/// Accuracy of always predicting the most frequent label.
pub fn chance_accuracy(labels: &[u32]) -> f64 {
    let all: Vec<usize> = (0..labels.len()).collect();
    majority(labels, &all) as f64 / labels.len() as f64
}
