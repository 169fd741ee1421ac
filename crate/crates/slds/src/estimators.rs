//! Resource planning and end-to-end summary-based distance estimation.
//!
//! Given a target accuracy `epsilon`, a confidence `delta`, a tail class for
//! the data, and a smoothness scale for the quantity being estimated, the
//! planners ([`plan_wasserstein`], [`plan_tv`]) size the whole pipeline: the
//! bucket width, the sketch capacity (counter budget), and the minimum
//! number of samples per side. The [`counters_for_pdf_error`],
//! [`counters_for_cdf_error`], and [`counters_for_l1_error`] helpers answer
//! the narrower question of how many counters a single summary needs for a
//! target pointwise, cumulative, or L1 accuracy at a given bucket width.
//!
//! The planned sizes are asymptotic shapes with an explicit multiplicative
//! [`EstimatorConfig::constant`]; the default constant 1 reproduces the bare
//! formulas, and larger constants scale the counter and sample budgets
//! without changing their growth rates.
//!
//! [`summarized_wasserstein`] and [`summarized_total_variation`] run the
//! full pipeline: plan, summarize each source shard independently, merge the
//! shards per side, and compare the merged summaries. Falling short of the
//! planned sample floor does not abort the estimate — the report flags it
//! instead, so callers can warn and proceed.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bucketing::BucketSpec;
use crate::distances::{distance, MetricKind};
use crate::error::{Error, Result};
use crate::summaries::DistributionSummary;

/// Declared tail class of a data distribution.
///
/// The class determines how fast bucket probabilities decay far from the
/// center, which is what lets a sublinear counter budget cover an unbounded
/// support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    /// Tails dominated by a centered gaussian with scale `sigma`.
    SubGaussian { sigma: f64 },
    /// Survival function dominated by `prefactor * exp(-t^(1/alpha))`;
    /// larger `alpha` means heavier (stretched-exponential) tails.
    SubWeibull { alpha: f64, prefactor: f64 },
}

impl TailModel {
    /// Gaussian-dominated tail with scale `sigma > 0`.
    pub fn sub_gaussian(sigma: f64) -> Result<Self> {
        let tail = TailModel::SubGaussian { sigma };
        tail.validate()?;
        Ok(tail)
    }

    /// Stretched-exponential tail with exponent parameter `alpha > 0` and
    /// survival prefactor `prefactor > 0`.
    pub fn sub_weibull(alpha: f64, prefactor: f64) -> Result<Self> {
        let tail = TailModel::SubWeibull { alpha, prefactor };
        tail.validate()?;
        Ok(tail)
    }

    /// Checks the parameters are positive and finite.
    pub fn validate(&self) -> Result<()> {
        match *self {
            TailModel::SubGaussian { sigma } => {
                if !sigma.is_finite() || sigma <= 0.0 {
                    return Err(Error::config(format!(
                        "gaussian tail scale must be positive and finite, got {sigma}"
                    )));
                }
            }
            TailModel::SubWeibull { alpha, prefactor } => {
                if !alpha.is_finite() || alpha <= 0.0 {
                    return Err(Error::config(format!(
                        "tail exponent parameter must be positive and finite, got {alpha}"
                    )));
                }
                if !prefactor.is_finite() || prefactor <= 0.0 {
                    return Err(Error::config(format!(
                        "tail prefactor must be positive and finite, got {prefactor}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How the bucket width is derived from the target accuracy when planning a
/// transport-distance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WassersteinBucketRule {
    /// `width = epsilon / 4`: splits the error budget evenly between
    /// discretization and sketching. The default.
    #[default]
    QuarterEpsilon,
    /// `width = epsilon / 2`: spends the whole discretization half of the
    /// budget on bucket width, allowing coarser buckets.
    HalfEpsilon,
}

/// Accuracy target and data assumptions driving the planners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Target absolute accuracy of the distance estimate, in `(0, 1)`.
    pub epsilon: f64,
    /// Allowed failure probability, in `(0, 1)`.
    pub delta: f64,
    /// Tail class of the data on both sides.
    pub tail: TailModel,
    /// Smoothness scale of the comparison (transport cost per unit of
    /// bucket distance); must be positive.
    pub lipschitz: f64,
    /// Multiplier applied to the planned counter and sample budgets;
    /// defaults to 1.
    pub constant: f64,
    /// Bucket-width rule for transport-distance planning.
    pub bucket_rule: WassersteinBucketRule,
}

impl EstimatorConfig {
    /// Creates a validated config with constant 1 and the default bucket
    /// rule.
    pub fn new(epsilon: f64, delta: f64, tail: TailModel, lipschitz: f64) -> Result<Self> {
        let config = EstimatorConfig {
            epsilon,
            delta,
            tail,
            lipschitz,
            constant: 1.0,
            bucket_rule: WassersteinBucketRule::default(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Returns the config with a different budget multiplier.
    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    /// Returns the config with a different bucket-width rule.
    pub fn with_bucket_rule(mut self, rule: WassersteinBucketRule) -> Self {
        self.bucket_rule = rule;
        self
    }

    /// Checks every field is in range.
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 || self.epsilon >= 1.0 {
            return Err(Error::config(format!(
                "target accuracy must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 || self.delta >= 1.0 {
            return Err(Error::config(format!(
                "failure probability must lie in (0, 1), got {}",
                self.delta
            )));
        }
        self.tail.validate()?;
        if !self.lipschitz.is_finite() || self.lipschitz <= 0.0 {
            return Err(Error::config(format!(
                "smoothness scale must be positive and finite, got {}",
                self.lipschitz
            )));
        }
        if !self.constant.is_finite() || self.constant <= 0.0 {
            return Err(Error::config(format!(
                "budget multiplier must be positive and finite, got {}",
                self.constant
            )));
        }
        Ok(())
    }
}

/// Planned pipeline sizes for one estimation task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatePlan {
    /// Bucket width for both sides' summaries.
    pub bucket_width: f64,
    /// Sketch capacity (even, at least 4) for both sides' summaries.
    pub counters: usize,
    /// Minimum sample count per side for the target confidence.
    pub n_min: u64,
}

/// Result of a planned, summary-based distance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    /// The estimated distance.
    pub distance: f64,
    /// The plan the pipeline ran under.
    pub plan: EstimatePlan,
    /// Samples observed on the first side.
    pub n_a: u64,
    /// Samples observed on the second side.
    pub n_b: u64,
    /// Whether either side fell short of the planned sample floor; the
    /// estimate is still produced, but its confidence claim no longer holds.
    pub below_threshold: bool,
    /// Buckets holding a counter in the first merged summary.
    pub assigned_a: usize,
    /// Buckets holding a counter in the second merged summary.
    pub assigned_b: usize,
}

/// Rounds a counter requirement up to a valid sketch capacity: even and at
/// least 4.
pub fn even_capacity(counters: u64) -> usize {
    let at_least = counters.max(4);
    let even = at_least + at_least % 2;
    even as usize
}

/// Sizes the pipeline for estimating an order-1 transport distance to
/// accuracy `epsilon` with confidence `1 - delta`.
pub fn plan_wasserstein(config: &EstimatorConfig) -> Result<EstimatePlan> {
    config.validate()?;
    let eps = config.epsilon;
    let ell = config.lipschitz;
    let bucket_width = match config.bucket_rule {
        WassersteinBucketRule::QuarterEpsilon => eps / 4.0,
        WassersteinBucketRule::HalfEpsilon => eps / 2.0,
    };
    // Counter budget: sigma/eps * log(ell/eps) for gaussian-dominated tails,
    // 1/eps * log(ell/eps)^alpha for stretched-exponential tails. When the
    // logarithm is nonpositive the requirement degenerates and the minimum
    // capacity suffices.
    let log_ratio = (ell / eps).ln();
    let raw_counters = if log_ratio <= 0.0 {
        0.0
    } else {
        match config.tail {
            TailModel::SubGaussian { sigma } => (sigma / eps) * log_ratio,
            TailModel::SubWeibull { alpha, .. } => (1.0 / eps) * log_ratio.powf(alpha),
        }
    } * config.constant;
    let counters = even_capacity(ceil_u64(raw_counters, "counter budget")?);
    let log_conf = (1.0 / config.delta).ln();
    let raw_n = match config.tail {
        TailModel::SubGaussian { .. } => {
            log_conf * max_of(&[eps.powi(-2), ell.powi(-2), ell * ell])
        }
        TailModel::SubWeibull { alpha, .. } => {
            log_conf
                * max_of(&[
                    eps.powi(-2),
                    log_conf.powf(2.0 * alpha - 1.0),
                    ell.powi(-2),
                    ell * ell,
                ])
        }
    } * config.constant;
    let n_min = ceil_u64(raw_n, "sample floor")?;
    Ok(EstimatePlan {
        bucket_width,
        counters,
        n_min,
    })
}

/// Sizes the pipeline for estimating total variation distance to accuracy
/// `epsilon` with confidence `1 - delta`.
///
/// Here `lipschitz` scales with how sharply the compared densities vary
/// across one bucket; the planned bucket width shrinks with it. The counter
/// budget is what [`counters_for_l1_error`] demands at that width, so each
/// summary's bucket masses track the exact histogram to within `epsilon` in
/// L1 — the error a total-variation estimate inherits directly.
pub fn plan_tv(config: &EstimatorConfig) -> Result<EstimatePlan> {
    config.validate()?;
    let eps = config.epsilon;
    let ell = config.lipschitz;
    let log_conf = (1.0 / config.delta).ln();
    let log_inv = (1.0 / eps).ln();
    let (bucket_width, raw_n) = match config.tail {
        TailModel::SubGaussian { sigma } => {
            let b = eps / (sigma * ell * (2.0 / eps).ln().sqrt());
            let n = eps.powi(-2) * f64::max(sigma * sigma * ell * log_inv / eps, log_conf);
            (b, n)
        }
        TailModel::SubWeibull { alpha, prefactor } => {
            let b = eps / (ell * (2.0 * prefactor / eps).ln().powf(alpha));
            let n = eps.powi(-2)
                * f64::max((ell * log_inv.powf(alpha) / eps) * gamma(1.0 + alpha), log_conf);
            (b, n)
        }
    };
    if !bucket_width.is_finite() || bucket_width <= 0.0 {
        return Err(Error::config(format!(
            "parameters yield a non-positive bucket width ({bucket_width})"
        )));
    }
    let counters = even_capacity(counters_for_l1_error(
        config.tail,
        bucket_width,
        eps,
        config.constant,
    )?);
    let n_min = ceil_u64(raw_n * config.constant, "sample floor")?;
    Ok(EstimatePlan {
        bucket_width,
        counters,
        n_min,
    })
}

/// Counters one summary needs so every bucket probability is accurate to
/// `epsilon` at bucket width `b`, for data in the given tail class.
///
/// `constant` is the configurable multiplier on the requirement; pass 1 for
/// the bare closed form. Returns the raw requirement; round it with
/// [`even_capacity`] before building a sketch.
pub fn counters_for_pdf_error(tail: TailModel, b: f64, epsilon: f64, constant: f64) -> Result<u64> {
    validate_counter_query(tail, b, epsilon, constant)?;
    let raw = match tail {
        TailModel::SubGaussian { sigma } => (8.0 * sigma / b) * (1.0 / epsilon).ln().sqrt(),
        TailModel::SubWeibull { alpha, .. } => (1.0 / b) * (1.0 / epsilon).ln().powf(alpha),
    };
    ceil_u64(raw * constant, "counter requirement")
}

/// Counters one summary needs so every cumulative probability is accurate
/// to `epsilon` at bucket width `b`, for data in the given tail class.
///
/// `constant` is the configurable multiplier on the requirement; pass 1 for
/// the bare closed form. Returns the raw requirement; round it with
/// [`even_capacity`] before building a sketch.
pub fn counters_for_cdf_error(tail: TailModel, b: f64, epsilon: f64, constant: f64) -> Result<u64> {
    validate_counter_query(tail, b, epsilon, constant)?;
    let raw = match tail {
        TailModel::SubGaussian { sigma } => (8.0 * sigma / b) * (4.0 / epsilon).ln().sqrt(),
        TailModel::SubWeibull { alpha, .. } => (1.0 / (2.0 * b)) * (4.0 / epsilon).ln().powf(alpha),
    };
    ceil_u64(raw * constant, "counter requirement")
}

/// Counters one summary needs so the L1 distance between its bucket
/// distribution and the exact one is at most `epsilon` at bucket width `b`.
///
/// `constant` is the configurable multiplier on the requirement; pass 1 for
/// the bare closed form. Returns the raw requirement; round it with
/// [`even_capacity`] before building a sketch.
pub fn counters_for_l1_error(tail: TailModel, b: f64, epsilon: f64, constant: f64) -> Result<u64> {
    validate_counter_query(tail, b, epsilon, constant)?;
    let raw = match tail {
        TailModel::SubGaussian { sigma } => (8.0 * sigma / b) * (6.0 / epsilon).ln().sqrt(),
        TailModel::SubWeibull { alpha, .. } => (1.0 / b) * (6.0 / epsilon).ln().powf(alpha),
    };
    ceil_u64(raw * constant, "counter requirement")
}

/// Summarizes each source shard independently at the given bucketing and
/// capacity, then merges the shards in order into one summary.
pub fn build_summary(
    spec: BucketSpec,
    capacity: usize,
    tail: Option<TailModel>,
    sources: &[&[f64]],
) -> Result<DistributionSummary> {
    if sources.is_empty() {
        return Err(Error::config(
            "at least one sample source is required".to_string(),
        ));
    }
    let mut merged = DistributionSummary::new(spec, capacity, tail)?;
    for source in sources {
        let mut part = DistributionSummary::new(spec, capacity, tail)?;
        part.observe_all(source)?;
        merged.merge_from(&part)?;
    }
    Ok(merged)
}

/// Plans and runs an order-`p` transport-distance estimate between two
/// sharded sample collections.
pub fn summarized_wasserstein(
    config: &EstimatorConfig,
    p: f64,
    sources_a: &[&[f64]],
    sources_b: &[&[f64]],
) -> Result<EstimateReport> {
    let plan = plan_wasserstein(config)?;
    estimate_with_plan(config, plan, MetricKind::Wasserstein { p }, sources_a, sources_b)
}

/// Plans and runs a total variation estimate between two sharded sample
/// collections.
pub fn summarized_total_variation(
    config: &EstimatorConfig,
    sources_a: &[&[f64]],
    sources_b: &[&[f64]],
) -> Result<EstimateReport> {
    let plan = plan_tv(config)?;
    estimate_with_plan(config, plan, MetricKind::TotalVariation, sources_a, sources_b)
}

fn estimate_with_plan(
    config: &EstimatorConfig,
    plan: EstimatePlan,
    metric: MetricKind,
    sources_a: &[&[f64]],
    sources_b: &[&[f64]],
) -> Result<EstimateReport> {
    let spec = BucketSpec::new(0.0, plan.bucket_width)?;
    let a = build_summary(spec, plan.counters, Some(config.tail), sources_a)?;
    let b = build_summary(spec, plan.counters, Some(config.tail), sources_b)?;
    let value = distance(&a, &b, metric)?;
    Ok(EstimateReport {
        distance: value,
        plan,
        n_a: a.n(),
        n_b: b.n(),
        below_threshold: a.n() < plan.n_min || b.n() < plan.n_min,
        assigned_a: a.assigned_buckets(),
        assigned_b: b.assigned_buckets(),
    })
}

fn validate_counter_query(tail: TailModel, b: f64, epsilon: f64, constant: f64) -> Result<()> {
    tail.validate()?;
    if !b.is_finite() || b <= 0.0 {
        return Err(Error::config(format!(
            "bucket width must be positive and finite, got {b}"
        )));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::config(format!(
            "target accuracy must lie in (0, 1), got {epsilon}"
        )));
    }
    if !constant.is_finite() || constant <= 0.0 {
        return Err(Error::config(format!(
            "requirement multiplier must be positive and finite, got {constant}"
        )));
    }
    Ok(())
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn ceil_u64(x: f64, what: &str) -> Result<u64> {
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(Error::config(format!(
            "{what} is not representable (got {x})"
        )));
    }
    if x <= 0.0 {
        return Ok(0);
    }
    Ok(x.ceil() as u64)
}
