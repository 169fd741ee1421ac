//! Fairness and privacy audits built on summarized distance estimation.
//!
//! Both audits follow the same shape: plan summary parameters from an
//! accuracy target, compress each input stream into one fixed-size summary,
//! and report distances between the summaries together with the plan and a
//! sublinearity ratio (capacity over the smallest stream length) so the
//! memory saving is visible in the output.
//!
//! [`audit_fairness`] measures demographic disparity between per-group score
//! distributions as the largest pairwise transport distance. At matched
//! accuracy, a small disparity certifies that no group's score distribution
//! strays far from any other's.
//!
//! [`audit_privacy`] compares loss distributions of records inside and
//! outside a training set. It reports their total-variation distance — the
//! advantage bound of a membership-inference adversary — and, on a grid of
//! log-ratio levels, the one-sided excess-mass divergence whose smallness
//! certifies approximate differential privacy at that level.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bucketing::BucketSpec;
use crate::distances::{hockey_stick, total_variation, wasserstein_distance};
use crate::error::{Error, Result};
use crate::estimators::{
    build_summary, plan_tv, plan_wasserstein, EstimatePlan, EstimatorConfig,
};

/// A distance between one unordered pair of groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance {
    /// First group label (the lexicographically smaller one).
    pub left: String,
    /// Second group label.
    pub right: String,
    /// Estimated transport distance between the groups' score summaries.
    pub value: f64,
}

/// Result of a demographic-disparity audit over grouped scores.
#[derive(Debug, Clone, Serialize)]
pub struct FairnessReport {
    /// Summary parameters the audit ran with.
    pub plan: EstimatePlan,
    /// Samples seen per group.
    pub group_counts: BTreeMap<String, u64>,
    /// Transport distance for every unordered group pair.
    pub pairs: Vec<PairDistance>,
    /// Largest pairwise distance: the demographic-parity disparity.
    pub disparity: f64,
    /// Whether any group fell short of the planned minimum sample count,
    /// in which case the accuracy target is not certified.
    pub below_threshold: bool,
    /// Sketch capacity over the smallest group size; below 1 means every
    /// summary is smaller than the stream it stands for.
    pub sublinearity: f64,
}

/// One privacy-audit row at a fixed log-ratio level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRow {
    /// Log-ratio level being certified.
    pub alpha: f64,
    /// Likelihood-ratio threshold `exp(alpha)` the divergence uses.
    pub tau: f64,
    /// Estimated excess mass of in-losses over `tau` times out-losses.
    pub hockey_stick: f64,
    /// Estimate plus the `(1 + tau) * epsilon` correction band: an upper
    /// confidence bound on the true divergence once the plan's sample
    /// threshold is met.
    pub corrected_bound: f64,
}

/// Result of a membership-privacy audit over in/out loss streams.
#[derive(Debug, Clone, Serialize)]
pub struct PrivacyReport {
    /// Summary parameters the audit ran with.
    pub plan: EstimatePlan,
    /// Samples in the in-training loss stream.
    pub n_in: u64,
    /// Samples in the out-of-training loss stream.
    pub n_out: u64,
    /// Estimated total-variation distance between the loss distributions:
    /// the distinguishing-advantage bound.
    pub total_variation: f64,
    /// Divergence estimates per requested log-ratio level.
    pub rows: Vec<AlphaRow>,
    /// Whether either stream fell short of the planned minimum sample
    /// count, in which case the accuracy target is not certified.
    pub below_threshold: bool,
    /// Sketch capacity over the smaller stream length.
    pub sublinearity: f64,
}

/// Estimates the demographic-parity disparity across score groups.
///
/// Every group's scores are compressed into one summary at the
/// transport-distance plan for `config`; the report carries the first-order
/// transport distance for each unordered pair and their maximum.
pub fn audit_fairness(
    grouped_scores: &BTreeMap<String, Vec<f64>>,
    config: &EstimatorConfig,
) -> Result<FairnessReport> {
    config.validate()?;
    if grouped_scores.len() < 2 {
        return Err(Error::data(format!(
            "fairness audit needs at least 2 groups, got {}",
            grouped_scores.len()
        )));
    }
    for (group, scores) in grouped_scores {
        if scores.is_empty() {
            return Err(Error::data(format!("group {group:?} has no scores")));
        }
    }
    let plan = plan_wasserstein(config)?;
    let spec = BucketSpec::new(0.0, plan.bucket_width)?;
    let mut labels = Vec::with_capacity(grouped_scores.len());
    let mut summaries = Vec::with_capacity(grouped_scores.len());
    let mut group_counts = BTreeMap::new();
    for (group, scores) in grouped_scores {
        labels.push(group.clone());
        summaries.push(build_summary(
            spec,
            plan.counters,
            Some(config.tail),
            &[scores.as_slice()],
        )?);
        group_counts.insert(group.clone(), scores.len() as u64);
    }
    let mut pairs = Vec::new();
    let mut disparity = 0.0f64;
    for i in 0..summaries.len() {
        for j in i + 1..summaries.len() {
            let value = wasserstein_distance(&summaries[i], &summaries[j], 1.0)?;
            disparity = disparity.max(value);
            pairs.push(PairDistance {
                left: labels[i].clone(),
                right: labels[j].clone(),
                value,
            });
        }
    }
    let smallest = group_counts.values().copied().min().expect("nonempty map");
    Ok(FairnessReport {
        plan,
        group_counts,
        pairs,
        disparity,
        below_threshold: smallest < plan.n_min,
        sublinearity: plan.counters as f64 / smallest as f64,
    })
}

/// Estimates membership-privacy leakage from in/out loss streams.
///
/// Both streams are compressed at the total-variation plan for `config`.
/// The report carries the TV estimate and, for every level in
/// `alpha_grid`, the one-sided divergence of in-losses against out-losses
/// at threshold `exp(alpha)` with its `(1 + exp(alpha)) * epsilon`
/// correction band.
pub fn audit_privacy(
    losses_in: &[f64],
    losses_out: &[f64],
    config: &EstimatorConfig,
    alpha_grid: &[f64],
) -> Result<PrivacyReport> {
    config.validate()?;
    if losses_in.is_empty() || losses_out.is_empty() {
        return Err(Error::data(
            "privacy audit needs nonempty in and out loss streams".to_string(),
        ));
    }
    for &alpha in alpha_grid {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::config(format!(
                "log-ratio levels must be nonnegative and finite, got {alpha}"
            )));
        }
    }
    let plan = plan_tv(config)?;
    let spec = BucketSpec::new(0.0, plan.bucket_width)?;
    let summary_in = build_summary(spec, plan.counters, Some(config.tail), &[losses_in])?;
    let summary_out = build_summary(spec, plan.counters, Some(config.tail), &[losses_out])?;
    let tv = total_variation(&summary_in, &summary_out)?;
    let rows = alpha_grid
        .iter()
        .map(|&alpha| {
            let tau = alpha.exp();
            let divergence = hockey_stick(&summary_in, &summary_out, tau)?;
            Ok(AlphaRow {
                alpha,
                tau,
                hockey_stick: divergence,
                corrected_bound: divergence + (1.0 + tau) * config.epsilon,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n_in = losses_in.len() as u64;
    let n_out = losses_out.len() as u64;
    let smaller = n_in.min(n_out);
    Ok(PrivacyReport {
        plan,
        n_in,
        n_out,
        total_variation: tv,
        rows,
        below_threshold: smaller < plan.n_min,
        sublinearity: plan.counters as f64 / smaller as f64,
    })
}
