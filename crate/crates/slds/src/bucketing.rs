//! Fixed-width bucketing of the real line and exact bucketed histograms.
//!
//! A [`BucketSpec`] partitions the reals into half-open intervals
//! `[origin + i*width, origin + (i+1)*width)` indexed by `i64`. Buckets are
//! identified with their midpoints when a discretized distribution needs a
//! support point, so the distance between buckets `i` and `j` is
//! `|i - j| * width`. Snapping every sample of a distribution to its bucket
//! midpoint moves it by less than `width` in any Wasserstein distance, which
//! is the discretization error budget used by the estimators in this crate.
//!
//! [`BucketedEmpirical`] is the exact (non-sketched) histogram of a sample
//! set under a spec; it serves as the ground-truth oracle that sketched
//! summaries are tested against.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest bucket-index magnitude accepted before a sample is declared out of
/// range. Beyond this, `f64 -> i64` conversion of the floored quotient is no
/// longer reliable.
const MAX_INDEX_MAGNITUDE: f64 = 4.0e18;

/// A uniform partition of the real line into half-open buckets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketSpec {
    origin: f64,
    width: f64,
}

impl BucketSpec {
    /// Creates a spec with the given origin and bucket width.
    ///
    /// `width` must be positive and finite; `origin` must be finite.
    pub fn new(origin: f64, width: f64) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::config(format!(
                "bucket origin must be finite, got {origin}"
            )));
        }
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::config(format!(
                "bucket width must be positive and finite, got {width}"
            )));
        }
        Ok(BucketSpec { origin, width })
    }

    /// Left edge of bucket 0.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Width of every bucket.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Index of the bucket containing `x`: `floor((x - origin) / width)`.
    ///
    /// Bucket boundaries belong to the bucket on their right. Fails for
    /// non-finite samples and for samples so far from the origin that the
    /// index would not fit the representable range.
    pub fn bucket_of(&self, x: f64) -> Result<i64> {
        if !x.is_finite() {
            return Err(Error::data(format!("sample must be finite, got {x}")));
        }
        let index = ((x - self.origin) / self.width).floor();
        if index.abs() > MAX_INDEX_MAGNITUDE {
            return Err(Error::data(format!(
                "sample {x} is out of bucketable range for width {}",
                self.width
            )));
        }
        Ok(index as i64)
    }

    /// Midpoint of bucket `i`: `origin + i*width + width/2`.
    pub fn midpoint(&self, i: i64) -> f64 {
        self.origin + (i as f64) * self.width + self.width / 2.0
    }

    /// Distance between the midpoints of buckets `i` and `j`:
    /// `|i - j| * width`.
    pub fn distance(&self, i: i64, j: i64) -> f64 {
        (i.abs_diff(j) as f64) * self.width
    }

    /// Whether two specs are the same partition, compared bit-for-bit.
    ///
    /// Summaries may only be merged or compared bucketwise when this holds;
    /// approximate equality would silently misalign buckets.
    pub fn same_partition(&self, other: &BucketSpec) -> bool {
        self.origin.to_bits() == other.origin.to_bits()
            && self.width.to_bits() == other.width.to_bits()
    }
}

/// Exact histogram of a sample set under a [`BucketSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct BucketedEmpirical {
    spec: BucketSpec,
    counts: BTreeMap<i64, u64>,
    n: u64,
}

impl BucketedEmpirical {
    /// Bucketizes `samples` exactly (every sample counted, no compression).
    pub fn from_samples(samples: &[f64], spec: BucketSpec) -> Result<Self> {
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        for &x in samples {
            let bucket = spec.bucket_of(x)?;
            *counts.entry(bucket).or_insert(0) += 1;
        }
        Ok(BucketedEmpirical {
            spec,
            counts,
            n: samples.len() as u64,
        })
    }

    /// The bucketing spec this histogram was built under.
    pub fn spec(&self) -> BucketSpec {
        self.spec
    }

    /// Number of samples counted.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of nonempty buckets.
    pub fn assigned_buckets(&self) -> usize {
        self.counts.len()
    }

    /// Count in bucket `i` (zero when empty).
    pub fn count(&self, i: i64) -> u64 {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    /// Iterates `(bucket, count)` in ascending bucket order.
    pub fn counts(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }

    /// Exact empirical probability of bucket `i`.
    ///
    /// Fails when the histogram holds no samples.
    pub fn pdf(&self, i: i64) -> Result<f64> {
        self.require_nonempty()?;
        Ok(self.count(i) as f64 / self.n as f64)
    }

    /// Exact empirical probability of buckets up to and including `i`.
    ///
    /// Fails when the histogram holds no samples.
    pub fn cdf(&self, i: i64) -> Result<f64> {
        self.require_nonempty()?;
        let prefix: u64 = self.counts.range(..=i).map(|(_, c)| *c).sum();
        Ok(prefix as f64 / self.n as f64)
    }

    /// Midpoint-snapped copy of the original samples, in ascending order.
    ///
    /// This is the exact discretized sample set the histogram represents.
    pub fn midpoint_samples(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n as usize);
        for (&i, &c) in &self.counts {
            let mid = self.spec.midpoint(i);
            for _ in 0..c {
                out.push(mid);
            }
        }
        out
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::data(
                "cannot query an empty bucketed histogram".to_string(),
            ));
        }
        Ok(())
    }
}
