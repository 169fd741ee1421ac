//! Exhaustive oracles and stream builders shared by the integration tests.
//!
//! Everything here is deliberately brute-force: full frequency tables,
//! exact residual weights, and exact cumulative sums, recomputed from
//! scratch so that sketch output is checked against independently derived
//! ground truth.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;

use slds::bucketing::BucketedEmpirical;
use slds::summaries::DistributionSummary;

/// Full frequency table of a weighted stream.
pub fn exact_frequencies(stream: &[(i64, u64)]) -> BTreeMap<i64, u64> {
    let mut freqs = BTreeMap::new();
    for &(item, weight) in stream {
        *freqs.entry(item).or_insert(0u64) += weight;
    }
    freqs
}

/// Total weight of a frequency table.
pub fn total_weight(freqs: &BTreeMap<i64, u64>) -> u64 {
    freqs.values().sum()
}

/// Residual weight: total minus the `keep` largest frequencies.
pub fn residual_weight(freqs: &BTreeMap<i64, u64>, keep: usize) -> u64 {
    let mut weights: Vec<u64> = freqs.values().copied().collect();
    weights.sort_unstable_by(|a, b| b.cmp(a));
    weights.iter().skip(keep).sum()
}

/// Exact cumulative weight of all items `<= item`.
pub fn exact_cumulative(freqs: &BTreeMap<i64, u64>, item: i64) -> u64 {
    freqs.range(..=item).map(|(_, w)| *w).sum()
}

/// A random weighted stream: up to `max_len` updates over `0..universe`
/// with weights `1..=max_weight`. Items are uniform over the universe.
pub fn random_stream(
    rng: &mut StdRng,
    max_len: usize,
    universe: i64,
    max_weight: u64,
) -> Vec<(i64, u64)> {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| (rng.gen_range(0..universe), rng.gen_range(1..=max_weight)))
        .collect()
}

/// A random weighted stream whose items follow a geometric law (item `j`
/// with probability `2^-(j+1)`), concentrating almost all weight on a few
/// items. Used where a test needs streams whose residual weight is small
/// relative to the total.
pub fn concentrated_stream(
    rng: &mut StdRng,
    max_len: usize,
    universe: i64,
    max_weight: u64,
) -> Vec<(i64, u64)> {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| {
            let item = (rng.gen::<u64>().trailing_zeros() as i64).min(universe - 1);
            (item, rng.gen_range(1..=max_weight))
        })
        .collect()
}

/// Splits a stream into `parts` contiguous pieces covering it in order.
pub fn split_stream(stream: &[(i64, u64)], parts: usize) -> Vec<&[(i64, u64)]> {
    assert!(parts >= 1 && parts <= stream.len());
    let base = stream.len() / parts;
    let extra = stream.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push(&stream[start..start + size]);
        start += size;
    }
    out
}

/// Largest absolute CDF gap between a summary and the exact bucketed
/// histogram of the same samples, over every bucket either side assigns.
pub fn sup_cdf_gap(summary: &DistributionSummary, exact: &BucketedEmpirical) -> f64 {
    let mut keys: Vec<i64> = exact.counts().map(|(i, _)| i).collect();
    keys.extend(summary.counters().map(|(i, _)| i));
    keys.sort_unstable();
    keys.dedup();
    let mut worst = 0.0f64;
    for &i in &keys {
        let approx = summary.cdf_estimate(i).expect("summary has mass");
        let truth = exact.cdf(i).expect("histogram has mass");
        worst = worst.max((approx - truth).abs());
    }
    worst
}

/// Half the l1 distance between a summary's bucket masses and the exact
/// histogram's: the total-variation gap between the two discrete laws.
pub fn tv_gap(summary: &DistributionSummary, exact: &BucketedEmpirical) -> f64 {
    let mut keys: Vec<i64> = exact.counts().map(|(i, _)| i).collect();
    keys.extend(summary.counters().map(|(i, _)| i));
    keys.sort_unstable();
    keys.dedup();
    let mut sum = 0.0f64;
    for &i in &keys {
        let approx = summary.pdf_estimate(i).expect("summary has mass");
        let truth = exact.pdf(i).expect("histogram has mass");
        sum += (approx - truth).abs();
    }
    0.5 * sum
}

/// Width of the interval spanned by the buckets the histogram assigns,
/// in sample units.
pub fn assigned_span(exact: &BucketedEmpirical) -> f64 {
    let keys: Vec<i64> = exact.counts().map(|(i, _)| i).collect();
    match (keys.first(), keys.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo + 1) as f64 * exact.spec().width(),
        _ => 0.0,
    }
}
