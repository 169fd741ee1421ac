//! Shared fixtures for the benchmark suite: deterministic sample streams
//! and prebuilt summaries, kept out of the timed sections.

use slds::{BucketSpec, DistributionSummary, Generator, Result, SourceStream};

/// Deterministic standard-normal draws shifted by `mean`.
pub fn gaussian_samples(mean: f64, seed: u64, n: usize) -> Vec<f64> {
    SourceStream {
        generator: Generator::Gaussian { mean, sigma: 1.0 },
        seed,
        length: n,
    }
    .generate()
    .expect("gaussian generation")
}

/// The bucket partition every benchmark shares: width 0.05 at the origin.
pub fn bench_spec() -> BucketSpec {
    BucketSpec::new(0.0, 0.05).expect("valid spec")
}

/// Builds a summary of `samples` at the given counter capacity.
pub fn summarize(samples: &[f64], capacity: usize) -> Result<DistributionSummary> {
    let mut summary = DistributionSummary::new(bench_spec(), capacity, None)?;
    summary.observe_all(samples)?;
    Ok(summary)
}
