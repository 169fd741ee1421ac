//! Sublinear distribution summaries: mergeable sketches of sample streams
//! with distance estimation, accuracy planning, and audits on top.
//!
//! The pipeline, bottom to top:
//!
//! - [`mmg`]: a deterministic heavy-hitter counter sketch with one-sided
//!   error that merging never worsens.
//! - [`bucketing`]: a fixed-width bucket partition of the real line, and
//!   exact bucketed histograms used as ground truth in validation.
//! - [`summaries`]: [`DistributionSummary`] — the sketch over buckets —
//!   with PDF/CDF/quantile queries, merging, and (de)serialization.
//! - [`distances`]: transport, total-variation, power-mean, and one-sided
//!   excess-mass distances between two summaries, plus brute-force oracles
//!   on raw samples.
//! - [`estimators`]: accuracy-driven planning (bucket width, sketch
//!   capacity, sample threshold) from tail assumptions, and one-call
//!   summarize-then-measure pipelines.
//! - [`streams`]: reproducible synthetic generators, stream splitting,
//!   sample-file ingestion, and tail-assumption diagnostics.
//! - [`audit`]: fairness (demographic disparity) and privacy (membership
//!   leakage) audits over score/loss streams.
//!
//! Summaries use memory proportional to their capacity, not the stream
//! length; capacities planned for a fixed accuracy grow only with the
//! accuracy and tail parameters. All estimation error is one-sided at the
//! sketch level and fully quantified by deterministic residual-weight
//! bounds, so distances between summaries of sufficiently long streams
//! land within the planned accuracy of the true values.

pub mod audit;
pub mod bucketing;
pub mod distances;
pub mod error;
pub mod estimators;
pub mod mmg;
pub mod streams;
pub mod summaries;

pub use audit::{
    audit_fairness, audit_privacy, AlphaRow, FairnessReport, PairDistance, PrivacyReport,
};
pub use bucketing::{BucketSpec, BucketedEmpirical};
pub use distances::{
    distance, hockey_stick, lp_distance, measure, oracle_tv, oracle_wasserstein1,
    total_variation, wasserstein_distance, DistanceReport, MetricKind,
};
pub use error::{Error, Result};
pub use estimators::{
    build_summary, counters_for_cdf_error, counters_for_l1_error, counters_for_pdf_error,
    even_capacity, plan_tv, plan_wasserstein, summarized_total_variation,
    summarized_wasserstein, EstimatePlan, EstimateReport, EstimatorConfig, TailModel,
    WassersteinBucketRule,
};
pub use mmg::{CounterSketch, MIN_CAPACITY};
pub use streams::{
    read_grouped_scores, read_samples, split_sources, tail_diagnostic, DiagnosticReport,
    Generator, SourceStream, TailCheck, DEFAULT_DIAGNOSTIC_SLACK,
};
pub use summaries::{DistributionSummary, FORMAT_VERSION, SUMMARY_MAGIC};
