//! Compact distribution summaries: bucketed sketches with PDF/CDF queries.
//!
//! A [`DistributionSummary`] pairs a [`BucketSpec`] with a bounded
//! [`CounterSketch`]: every observed sample is mapped to its bucket index and
//! fed to the sketch with unit weight. The summary answers normalized
//! density, cumulative-probability, and quantile (pseudoinverse) queries from
//! the surviving counters, using the counter total — not the raw sample
//! count — as the normalizer so that the reported distribution always sums
//! to one over the assigned buckets.
//!
//! Summaries built under the same bucket spec and capacity merge losslessly
//! with respect to the sketch guarantees, which makes them suitable for
//! distributed collection: summarize each shard locally, merge, then query.
//!
//! The module also defines a stable serialized form: a little-endian binary
//! layout (identified by the `SLDS` magic) and an equivalent JSON encoding.
//! Both round-trip bit-exactly, and both are revalidated structurally on
//! read, so a corrupted or hand-edited file is rejected instead of producing
//! silently wrong estimates.

use std::io::Read as IoRead;
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt};
use serde::{Deserialize, Serialize};

use crate::bucketing::BucketSpec;
use crate::error::{Error, Result};
use crate::estimators::TailModel;
use crate::mmg::{CounterSketch, MIN_CAPACITY};

/// Leading magic bytes of the binary summary format.
pub const SUMMARY_MAGIC: [u8; 4] = *b"SLDS";

/// Current serialization format version.
pub const FORMAT_VERSION: u16 = 1;

const TAIL_TAG_NONE: u8 = 0;
const TAIL_TAG_SUB_GAUSSIAN: u8 = 1;
const TAIL_TAG_SUB_WEIBULL: u8 = 2;

/// Sketched representation of a one-dimensional sample distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    spec: BucketSpec,
    sketch: CounterSketch,
    tail: Option<TailModel>,
}

impl DistributionSummary {
    /// Creates an empty summary over the given bucketing with a sketch of the
    /// given capacity. `tail` optionally records the tail class the data is
    /// assumed to follow; it travels with the summary but does not affect
    /// updates or queries.
    pub fn new(spec: BucketSpec, capacity: usize, tail: Option<TailModel>) -> Result<Self> {
        if let Some(t) = tail {
            t.validate()?;
        }
        Ok(DistributionSummary {
            spec,
            sketch: CounterSketch::new(capacity)?,
            tail,
        })
    }

    /// The bucketing this summary discretizes samples with.
    pub fn spec(&self) -> BucketSpec {
        self.spec
    }

    /// Maximum number of bucket counters the summary may hold.
    pub fn capacity(&self) -> usize {
        self.sketch.capacity()
    }

    /// The tail class recorded for the summarized data, if any.
    pub fn tail(&self) -> Option<TailModel> {
        self.tail
    }

    /// Number of samples observed (including samples whose weight was later
    /// lost to counter evictions).
    pub fn n(&self) -> u64 {
        self.sketch.processed_weight()
    }

    /// Sum of the surviving bucket counters; the normalizer for all
    /// probability queries.
    pub fn counter_total(&self) -> u64 {
        self.sketch.counter_total()
    }

    /// Number of buckets currently holding a counter.
    pub fn assigned_buckets(&self) -> usize {
        self.sketch.len()
    }

    /// Iterates `(bucket, counter)` pairs in ascending bucket order.
    pub fn counters(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.sketch.counters()
    }

    /// Records one sample.
    pub fn observe(&mut self, x: f64) -> Result<()> {
        let bucket = self.spec.bucket_of(x)?;
        self.sketch.update(bucket, 1)
    }

    /// Records every sample in `xs`.
    pub fn observe_all(&mut self, xs: &[f64]) -> Result<()> {
        for &x in xs {
            self.observe(x)?;
        }
        Ok(())
    }

    /// Estimated probability of bucket `i`, normalized by the counter total.
    ///
    /// Fails when no counter weight survives (empty summary, or every counter
    /// evicted).
    pub fn pdf_estimate(&self, i: i64) -> Result<f64> {
        let total = self.require_mass()?;
        Ok(self.sketch.estimate(i) as f64 / total as f64)
    }

    /// Estimated probability of all buckets up to and including `i`.
    ///
    /// Fails when no counter weight survives.
    pub fn cdf_estimate(&self, i: i64) -> Result<f64> {
        let total = self.require_mass()?;
        Ok(self.sketch.cumulative_estimate(i) as f64 / total as f64)
    }

    /// Smallest assigned bucket midpoint whose cumulative probability reaches
    /// `r`; the step-function inverse of [`cdf_estimate`](Self::cdf_estimate).
    ///
    /// `r` must lie in `(0, 1]`. Fails when no counter weight survives.
    pub fn pseudoinverse(&self, r: f64) -> Result<f64> {
        if !r.is_finite() || r <= 0.0 || r > 1.0 {
            return Err(Error::config(format!(
                "quantile level must lie in (0, 1], got {r}"
            )));
        }
        let total = self.require_mass()?;
        let mut acc: u64 = 0;
        for (bucket, count) in self.sketch.counters() {
            acc += count;
            if acc as f64 / total as f64 >= r {
                return Ok(self.spec.midpoint(bucket));
            }
        }
        // The accumulated ratio reaches exactly 1.0 on the last counter, so
        // the loop always returns for r <= 1.
        unreachable!("cumulative ratio reaches 1.0 at the last assigned bucket")
    }

    /// Folds `other` into `self`.
    ///
    /// Both summaries must use bitwise-identical bucket specs, equal sketch
    /// capacities, and the same declared tail class; anything else would
    /// silently misalign buckets or mix incompatible assumptions.
    pub fn merge_from(&mut self, other: &DistributionSummary) -> Result<()> {
        if !self.spec.same_partition(&other.spec) {
            return Err(Error::config(format!(
                "cannot merge summaries with different bucketings \
                 (origin {} width {} vs origin {} width {})",
                self.spec.origin(),
                self.spec.width(),
                other.spec.origin(),
                other.spec.width()
            )));
        }
        if self.tail != other.tail {
            return Err(Error::config(
                "cannot merge summaries with different tail classes".to_string(),
            ));
        }
        self.sketch.merge_from(&other.sketch)
    }

    fn require_mass(&self) -> Result<u64> {
        let total = self.sketch.counter_total();
        if total == 0 {
            return Err(Error::data(
                "summary holds no counter weight to normalize by".to_string(),
            ));
        }
        Ok(total)
    }

    /// Serializes to the binary format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(55 + 16 * self.sketch.len());
        buf.extend_from_slice(&SUMMARY_MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let (tag, p1, p2) = tail_to_tag(self.tail);
        buf.push(tag);
        buf.extend_from_slice(&p1.to_le_bytes());
        buf.extend_from_slice(&p2.to_le_bytes());
        buf.extend_from_slice(&self.spec.origin().to_le_bytes());
        buf.extend_from_slice(&self.spec.width().to_le_bytes());
        buf.extend_from_slice(&(self.sketch.capacity() as u32).to_le_bytes());
        buf.extend_from_slice(&self.sketch.processed_weight().to_le_bytes());
        buf.extend_from_slice(&(self.sketch.len() as u32).to_le_bytes());
        for (bucket, count) in self.sketch.counters() {
            buf.extend_from_slice(&bucket.to_le_bytes());
            buf.extend_from_slice(&count.to_le_bytes());
        }
        buf
    }

    /// Parses the binary format, revalidating every structural invariant.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = |_| Error::format("summary data is truncated".to_string());
        let mut cursor = bytes;
        let mut magic = [0u8; 4];
        cursor.read_exact(&mut magic).map_err(truncated)?;
        if magic != SUMMARY_MAGIC {
            return Err(Error::format(
                "not a distribution summary: bad magic bytes".to_string(),
            ));
        }
        let version = cursor.read_u16::<LittleEndian>().map_err(truncated)?;
        if version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported summary format version {version}"
            )));
        }
        let tag = cursor.read_u8().map_err(truncated)?;
        let p1 = cursor.read_f64::<LittleEndian>().map_err(truncated)?;
        let p2 = cursor.read_f64::<LittleEndian>().map_err(truncated)?;
        let tail = tail_from_tag(tag, p1, p2)?;
        let origin = cursor.read_f64::<LittleEndian>().map_err(truncated)?;
        let width = cursor.read_f64::<LittleEndian>().map_err(truncated)?;
        let capacity = cursor.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let processed = cursor.read_u64::<LittleEndian>().map_err(truncated)?;
        let count = cursor.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let expected = count
            .checked_mul(16)
            .ok_or_else(|| Error::format("summary counter count overflows".to_string()))?;
        if cursor.len() < expected {
            return Err(Error::format("summary data is truncated".to_string()));
        }
        if cursor.len() > expected {
            return Err(Error::format(format!(
                "{} trailing bytes after summary data",
                cursor.len() - expected
            )));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let bucket = cursor.read_i64::<LittleEndian>().map_err(truncated)?;
            let counter = cursor.read_u64::<LittleEndian>().map_err(truncated)?;
            entries.push((bucket, counter));
        }
        Self::from_repr(SummaryRepr {
            version,
            tail,
            origin,
            width,
            capacity: capacity as u32,
            processed,
            entries,
        })
    }

    /// Serializes to the JSON mirror of the binary format.
    pub fn to_json(&self) -> String {
        let repr = SummaryRepr {
            version: FORMAT_VERSION,
            tail: self.tail,
            origin: self.spec.origin(),
            width: self.spec.width(),
            capacity: self.sketch.capacity() as u32,
            processed: self.sketch.processed_weight(),
            entries: self.sketch.counters().collect(),
        };
        serde_json::to_string_pretty(&repr).expect("summary JSON serialization cannot fail")
    }

    /// Parses the JSON mirror, applying the same validation as the binary
    /// reader.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: SummaryRepr = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("invalid summary JSON: {e}")))?;
        Self::from_repr(repr)
    }

    /// Writes the binary format to `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Writes the JSON format to `path`.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Reads a summary from `path`, auto-detecting binary (by magic bytes)
    /// versus JSON.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(&path)?;
        if bytes.starts_with(&SUMMARY_MAGIC) {
            return Self::from_bytes(&bytes);
        }
        let text = std::str::from_utf8(&bytes).map_err(|_| {
            Error::format("file is neither a binary nor a JSON summary".to_string())
        })?;
        Self::from_json(text)
    }

    fn from_repr(repr: SummaryRepr) -> Result<Self> {
        if repr.version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported summary format version {}",
                repr.version
            )));
        }
        if let Some(t) = repr.tail {
            t.validate()
                .map_err(|e| Error::format(format!("invalid tail class in summary: {e}")))?;
        }
        let spec = BucketSpec::new(repr.origin, repr.width)
            .map_err(|e| Error::format(format!("invalid bucketing in summary: {e}")))?;
        let capacity = repr.capacity as usize;
        if capacity < MIN_CAPACITY || capacity % 2 != 0 {
            return Err(Error::format(format!(
                "summary sketch capacity must be even and at least {MIN_CAPACITY}, got {capacity}"
            )));
        }
        let sketch = CounterSketch::from_parts(capacity, &repr.entries, repr.processed)?;
        Ok(DistributionSummary {
            spec,
            sketch,
            tail: repr.tail,
        })
    }
}

/// Field-for-field serialized form shared by the JSON encoding and the
/// binary reader's validation path.
#[derive(Debug, Serialize, Deserialize)]
struct SummaryRepr {
    version: u16,
    tail: Option<TailModel>,
    origin: f64,
    width: f64,
    capacity: u32,
    processed: u64,
    entries: Vec<(i64, u64)>,
}

fn tail_to_tag(tail: Option<TailModel>) -> (u8, f64, f64) {
    match tail {
        None => (TAIL_TAG_NONE, 0.0, 0.0),
        Some(TailModel::SubGaussian { sigma }) => (TAIL_TAG_SUB_GAUSSIAN, sigma, 0.0),
        Some(TailModel::SubWeibull { alpha, prefactor }) => {
            (TAIL_TAG_SUB_WEIBULL, alpha, prefactor)
        }
    }
}

fn tail_from_tag(tag: u8, p1: f64, p2: f64) -> Result<Option<TailModel>> {
    match tag {
        TAIL_TAG_NONE => {
            if p1 != 0.0 || p2 != 0.0 {
                return Err(Error::format(
                    "tail parameters must be zero when no tail class is set".to_string(),
                ));
            }
            Ok(None)
        }
        TAIL_TAG_SUB_GAUSSIAN => {
            if p2 != 0.0 {
                return Err(Error::format(
                    "second tail parameter must be zero for the gaussian-tail class".to_string(),
                ));
            }
            Ok(Some(TailModel::SubGaussian { sigma: p1 }))
        }
        TAIL_TAG_SUB_WEIBULL => Ok(Some(TailModel::SubWeibull {
            alpha: p1,
            prefactor: p2,
        })),
        other => Err(Error::format(format!("unknown tail class tag {other}"))),
    }
}
