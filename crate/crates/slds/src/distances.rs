//! Statistical distances between distribution summaries, plus exact oracles.
//!
//! Transport distances ([`wasserstein_distance`]) integrate the gap between
//! the two summaries' step inverse-CDFs over the unit interval, splitting it
//! at the merged cumulative-probability breakpoints of both summaries. The
//! breakpoints are handled as exact integer fractions (counter prefix sums
//! over the counter-total product), so segment boundaries never drift; only
//! the final per-segment arithmetic is floating point, accumulated with
//! compensated summation. Because the integration works in real units via
//! bucket midpoints, the two summaries may use different bucketings.
//!
//! Bucketwise distances ([`total_variation`], [`lp_distance`],
//! [`hockey_stick`]) compare probabilities bucket by bucket and therefore
//! require bitwise-identical bucketings. Total variation is computed exactly
//! over the integers (cross-multiplied counters), which preserves identities
//! that matter downstream: two equal summaries are at distance exactly zero,
//! the hockey-stick divergence at threshold one equals total variation
//! bit-for-bit, and the L1 distance is exactly twice total variation.
//!
//! The `oracle_*` functions compute the same quantities from raw data by
//! brute force; they exist to validate the summary-based estimators and are
//! part of the public API so downstream tests can use them too.

use serde::{Deserialize, Serialize};

use crate::bucketing::BucketedEmpirical;
use crate::error::{Error, Result};
use crate::summaries::DistributionSummary;

/// Which distance to compute, with its parameter where one applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    /// Transport distance of order `p >= 1` between summarized distributions.
    Wasserstein { p: f64 },
    /// Half the L1 distance between bucket probability vectors.
    TotalVariation,
    /// L`p` distance between bucket probability vectors, `p >= 1`.
    Lp { p: f64 },
    /// One-sided excess-probability divergence at threshold `tau >= 1`.
    HockeyStick { tau: f64 },
}

/// A computed distance together with evaluation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    /// The metric that was evaluated, with its parameter.
    pub metric: MetricKind,
    /// The distance value.
    pub value: f64,
    /// Breakpoints visited: integration segments for transport distances,
    /// union buckets for bucketwise metrics.
    pub breakpoints: usize,
}

/// Computes `metric` between two summaries and reports how much work the
/// evaluation visited.
pub fn measure(
    a: &DistributionSummary,
    b: &DistributionSummary,
    metric: MetricKind,
) -> Result<DistanceReport> {
    let (value, breakpoints) = match metric {
        MetricKind::Wasserstein { p } => wasserstein_with_segments(a, b, p)?,
        _ => {
            let value = distance(a, b, metric)?;
            let ea: Vec<(i64, u64)> = a.counters().collect();
            let eb: Vec<(i64, u64)> = b.counters().collect();
            let mut count = 0usize;
            for_each_union(&ea, &eb, |_, _| count += 1);
            (value, count)
        }
    };
    Ok(DistanceReport {
        metric,
        value,
        breakpoints,
    })
}

/// Computes `metric` between two summaries.
pub fn distance(
    a: &DistributionSummary,
    b: &DistributionSummary,
    metric: MetricKind,
) -> Result<f64> {
    match metric {
        MetricKind::Wasserstein { p } => wasserstein_distance(a, b, p),
        MetricKind::TotalVariation => total_variation(a, b),
        MetricKind::Lp { p } => lp_distance(a, b, p),
        MetricKind::HockeyStick { tau } => hockey_stick(a, b, tau),
    }
}

/// Order-`p` transport distance between the distributions represented by two
/// summaries, treating each summary as a discrete distribution on its bucket
/// midpoints.
///
/// The summaries may use different bucketings. `p` must be finite and at
/// least 1; both summaries must hold counter weight.
pub fn wasserstein_distance(
    a: &DistributionSummary,
    b: &DistributionSummary,
    p: f64,
) -> Result<f64> {
    Ok(wasserstein_with_segments(a, b, p)?.0)
}

fn wasserstein_with_segments(
    a: &DistributionSummary,
    b: &DistributionSummary,
    p: f64,
) -> Result<(f64, usize)> {
    validate_order(p)?;
    let ca = nonzero_total(a)?;
    let cb = nonzero_total(b)?;
    let ea: Vec<(i64, u64)> = a.counters().collect();
    let eb: Vec<(i64, u64)> = b.counters().collect();
    let denom = ca as u128 * cb as u128;
    // Cumulative counter sums, expressed over the common denominator
    // `ca * cb` so breakpoints from both summaries compare exactly.
    let na = prefix_numerators(&ea, cb);
    let nb = prefix_numerators(&eb, ca);
    debug_assert_eq!(na.last(), Some(&denom));
    debug_assert_eq!(nb.last(), Some(&denom));
    let mut sum = KahanSum::default();
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut prev: u128 = 0;
    let mut segments = 0usize;
    while ia < ea.len() && ib < eb.len() {
        let next = na[ia].min(nb[ib]);
        if next > prev {
            let seg = (next - prev) as f64 / denom as f64;
            let gap = (a.spec().midpoint(ea[ia].0) - b.spec().midpoint(eb[ib].0)).abs();
            let term = if p == 1.0 { gap } else { gap.powf(p) };
            sum.add(term * seg);
            segments += 1;
        }
        if na[ia] == next {
            ia += 1;
        }
        if nb[ib] == next {
            ib += 1;
        }
        prev = next;
    }
    let raw = sum.value();
    let value = if p == 1.0 { raw } else { raw.powf(1.0 / p) };
    Ok((value, segments))
}

/// Total variation distance between the bucket distributions of two
/// summaries sharing one bucketing: half the L1 distance between their
/// probability vectors.
///
/// Computed exactly over the integers (cross-multiplied counters), so equal
/// summaries yield exactly zero and disjoint supports exactly one.
pub fn total_variation(a: &DistributionSummary, b: &DistributionSummary) -> Result<f64> {
    require_same_partition(a, b)?;
    let ca = nonzero_total(a)?;
    let cb = nonzero_total(b)?;
    let ea: Vec<(i64, u64)> = a.counters().collect();
    let eb: Vec<(i64, u64)> = b.counters().collect();
    Ok(half_l1_cross(&ea, ca, &eb, cb))
}

/// L`p` distance between the bucket probability vectors of two summaries
/// sharing one bucketing.
///
/// At `p = 1` this is exactly twice [`total_variation`].
pub fn lp_distance(a: &DistributionSummary, b: &DistributionSummary, p: f64) -> Result<f64> {
    validate_order(p)?;
    require_same_partition(a, b)?;
    if p == 1.0 {
        // Doubling is exact in binary floating point, so the L1/total
        // variation identity holds bit-for-bit.
        return Ok(2.0 * total_variation(a, b)?);
    }
    let ca = nonzero_total(a)?;
    let cb = nonzero_total(b)?;
    let ea: Vec<(i64, u64)> = a.counters().collect();
    let eb: Vec<(i64, u64)> = b.counters().collect();
    let denom = (ca as u128 * cb as u128) as f64;
    let mut sum = KahanSum::default();
    for_each_union(&ea, &eb, |fa, fb| {
        let diff = (fa as u128 * cb as u128).abs_diff(fb as u128 * ca as u128) as f64 / denom;
        if diff > 0.0 {
            sum.add(diff.powf(p));
        }
    });
    Ok(sum.value().powf(1.0 / p))
}

/// One-sided hockey-stick divergence at threshold `tau >= 1`: the total
/// probability by which the first summary's buckets exceed `tau` times the
/// second's. Asymmetric in its arguments.
///
/// At `tau = 1` this equals [`total_variation`] bit-for-bit.
pub fn hockey_stick(a: &DistributionSummary, b: &DistributionSummary, tau: f64) -> Result<f64> {
    if !tau.is_finite() || tau < 1.0 {
        return Err(Error::config(format!(
            "hockey-stick threshold must be finite and at least 1, got {tau}"
        )));
    }
    require_same_partition(a, b)?;
    if tau == 1.0 {
        return total_variation(a, b);
    }
    let ca = nonzero_total(a)?;
    let cb = nonzero_total(b)?;
    let ea: Vec<(i64, u64)> = a.counters().collect();
    let eb: Vec<(i64, u64)> = b.counters().collect();
    let mut sum = KahanSum::default();
    for_each_union(&ea, &eb, |fa, fb| {
        let excess = fa as f64 / ca as f64 - tau * (fb as f64 / cb as f64);
        if excess > 0.0 {
            sum.add(excess);
        }
    });
    Ok(sum.value())
}

/// Exact order-1 transport distance between two equally sized sample sets:
/// the mean absolute gap between their sorted order statistics.
///
/// This is the brute-force ground truth the summary-based estimator is
/// validated against. Both sets must be nonempty, equal in size, and finite.
pub fn oracle_wasserstein1(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::config(format!(
            "transport oracle needs equally sized nonempty sample sets, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let sx = sorted_finite(xs)?;
    let sy = sorted_finite(ys)?;
    let mut sum = KahanSum::default();
    for (x, y) in sx.iter().zip(sy.iter()) {
        sum.add((x - y).abs());
    }
    Ok(sum.value() / ys.len() as f64)
}

/// Exact total variation distance between two exhaustive histograms over the
/// same bucketing, computed over the integers.
pub fn oracle_tv(a: &BucketedEmpirical, b: &BucketedEmpirical) -> Result<f64> {
    if !a.spec().same_partition(&b.spec()) {
        return Err(Error::config(
            "total variation oracle requires identically bucketed histograms".to_string(),
        ));
    }
    if a.n() == 0 || b.n() == 0 {
        return Err(Error::data(
            "total variation oracle requires nonempty histograms".to_string(),
        ));
    }
    let ea: Vec<(i64, u64)> = a.counts().collect();
    let eb: Vec<(i64, u64)> = b.counts().collect();
    Ok(half_l1_cross(&ea, a.n(), &eb, b.n()))
}

/// Compensated (Neumaier) floating-point accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    /// Adds one term.
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// The compensated total.
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn validate_order(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::config(format!(
            "distance order must be finite and at least 1, got {p}"
        )));
    }
    Ok(())
}

fn nonzero_total(s: &DistributionSummary) -> Result<u64> {
    let total = s.counter_total();
    if total == 0 {
        return Err(Error::data(
            "summary holds no counter weight; distances are undefined".to_string(),
        ));
    }
    Ok(total)
}

fn require_same_partition(a: &DistributionSummary, b: &DistributionSummary) -> Result<()> {
    if !a.spec().same_partition(&b.spec()) {
        return Err(Error::config(
            "bucketwise distances require summaries with identical bucketings".to_string(),
        ));
    }
    Ok(())
}

fn sorted_finite(xs: &[f64]) -> Result<Vec<f64>> {
    for &x in xs {
        if !x.is_finite() {
            return Err(Error::data(format!("sample must be finite, got {x}")));
        }
    }
    let mut out = xs.to_vec();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite samples compare"));
    Ok(out)
}

/// Cumulative counter sums of `entries`, scaled by `other_total` so both
/// summaries' breakpoints live over one common denominator.
fn prefix_numerators(entries: &[(i64, u64)], other_total: u64) -> Vec<u128> {
    let mut acc: u128 = 0;
    entries
        .iter()
        .map(|&(_, c)| {
            acc += c as u128 * other_total as u128;
            acc
        })
        .collect()
}

/// Half the exact L1 distance between `ea/ca` and `eb/cb` as probability
/// vectors: cross-multiplied integer numerators, summed with overflow
/// fallback to compensated floating point.
fn half_l1_cross(ea: &[(i64, u64)], ca: u64, eb: &[(i64, u64)], cb: u64) -> f64 {
    let denom = ca as u128 * cb as u128;
    let mut exact: u128 = 0;
    let mut overflowed = false;
    let mut approx = KahanSum::default();
    for_each_union(ea, eb, |fa, fb| {
        let diff = (fa as u128 * cb as u128).abs_diff(fb as u128 * ca as u128);
        if overflowed {
            approx.add(diff as f64);
        } else {
            match exact.checked_add(diff) {
                Some(v) => exact = v,
                None => {
                    overflowed = true;
                    approx.add(exact as f64);
                    approx.add(diff as f64);
                }
            }
        }
    });
    let numerator = if overflowed {
        approx.value()
    } else {
        exact as f64
    };
    0.5 * (numerator / denom as f64)
}

/// Visits the union of both entry lists' keys in ascending order, passing
/// the pair of counts (zero where a key is absent on one side).
fn for_each_union(ea: &[(i64, u64)], eb: &[(i64, u64)], mut f: impl FnMut(u64, u64)) {
    let (mut ia, mut ib) = (0usize, 0usize);
    loop {
        match (ea.get(ia), eb.get(ib)) {
            (None, None) => break,
            (Some(&(_, va)), None) => {
                ia += 1;
                f(va, 0);
            }
            (None, Some(&(_, vb))) => {
                ib += 1;
                f(0, vb);
            }
            (Some(&(ka, va)), Some(&(kb, vb))) => {
                if ka < kb {
                    ia += 1;
                    f(va, 0);
                } else if kb < ka {
                    ib += 1;
                    f(0, vb);
                } else {
                    ia += 1;
                    ib += 1;
                    f(va, vb);
                }
            }
        }
    }
}
