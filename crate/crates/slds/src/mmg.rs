//! Bounded-memory frequency sketch with mergeable deterministic guarantees.
//!
//! [`CounterSketch`] tracks at most `k` items from a weighted stream of
//! integer keys. Estimates never overestimate the true item weight, and the
//! undercount is bounded in terms of the stream weight that is *not*
//! concentrated on the heaviest items: with capacity `k`, every item's
//! estimate is within `4 * R / k` of its true weight, where `R` is the total
//! weight outside the `k/4` heaviest items. Prefix (cumulative) estimates
//! undercount by at most `2 * R`. Both bounds survive merging sketches built
//! from different stream segments, which is what makes the structure safe for
//! distributed aggregation.
//!
//! When the sketch is at capacity and an unknown item arrives, every counter
//! is reduced by the `k/2`-th largest counter value (counting multiplicity)
//! and counters that drop to zero or below are evicted. The arriving item is
//! admitted only when its weight survives that same reduction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Minimum admissible capacity.
pub const MIN_CAPACITY: usize = 4;

/// Bounded map of item keys to weight counters with deterministic error bounds.
///
/// Keys are `i64` (bucket indices upstream); weights are positive `u64`
/// values. All operations are deterministic: the final state depends only on
/// the sequence of updates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterSketch {
    capacity: usize,
    counters: BTreeMap<i64, u64>,
    processed: u64,
}

impl CounterSketch {
    /// Creates an empty sketch that stores at most `capacity` counters.
    ///
    /// `capacity` must be even and at least [`MIN_CAPACITY`] so the eviction
    /// threshold (the `capacity/2`-th largest counter) is well defined.
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity < MIN_CAPACITY {
            return Err(Error::config(format!(
                "sketch capacity must be at least {MIN_CAPACITY}, got {capacity}"
            )));
        }
        if capacity % 2 != 0 {
            return Err(Error::config(format!(
                "sketch capacity must be even, got {capacity}"
            )));
        }
        Ok(CounterSketch {
            capacity,
            counters: BTreeMap::new(),
            processed: 0,
        })
    }

    /// Reconstructs a sketch from serialized parts, re-checking every invariant.
    ///
    /// `entries` must be strictly ascending in key with positive counts, hold
    /// at most `capacity` pairs, and sum to at most `processed`.
    pub fn from_parts(capacity: usize, entries: &[(i64, u64)], processed: u64) -> Result<Self> {
        let mut sketch = CounterSketch::new(capacity)?;
        if entries.len() > capacity {
            return Err(Error::format(format!(
                "{} counters exceed capacity {capacity}",
                entries.len()
            )));
        }
        let mut total: u64 = 0;
        let mut prev: Option<i64> = None;
        for &(key, count) in entries {
            if count == 0 {
                return Err(Error::format(format!("counter for key {key} is zero")));
            }
            if let Some(p) = prev {
                if key <= p {
                    return Err(Error::format(format!(
                        "counter keys not strictly ascending at {key}"
                    )));
                }
            }
            prev = Some(key);
            total = total
                .checked_add(count)
                .ok_or_else(|| Error::format("counter total overflows u64".to_string()))?;
            sketch.counters.insert(key, count);
        }
        if total > processed {
            return Err(Error::format(format!(
                "counter total {total} exceeds processed weight {processed}"
            )));
        }
        sketch.processed = processed;
        Ok(sketch)
    }

    /// Maximum number of counters this sketch may hold.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of currently assigned counters.
    pub fn len(&self) -> usize {
        self.counters.len()
    }

    /// Whether no counter is currently assigned.
    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    /// Total weight fed into this sketch (including weight later evicted).
    pub fn processed_weight(&self) -> u64 {
        self.processed
    }

    /// Sum of all currently assigned counters.
    ///
    /// Always at most [`processed_weight`](Self::processed_weight); the gap is
    /// the weight lost to evictions.
    pub fn counter_total(&self) -> u64 {
        self.counters.values().sum()
    }

    /// Adds `weight` of item `item` to the sketch.
    ///
    /// `weight` must be positive. Fails if the accumulated stream weight
    /// would overflow `u64`.
    pub fn update(&mut self, item: i64, weight: u64) -> Result<()> {
        if weight == 0 {
            return Err(Error::config("update weight must be positive".to_string()));
        }
        let processed = self
            .processed
            .checked_add(weight)
            .ok_or_else(|| Error::data("processed stream weight overflows u64".to_string()))?;
        self.apply(item, weight)?;
        self.processed = processed;
        Ok(())
    }

    /// Estimated weight of `item`: the stored counter, or zero if unassigned.
    ///
    /// Never exceeds the true accumulated weight of `item`.
    pub fn estimate(&self, item: i64) -> u64 {
        self.counters.get(&item).copied().unwrap_or(0)
    }

    /// Estimated total weight of all items with key at most `item`.
    ///
    /// Never exceeds the true prefix weight.
    pub fn cumulative_estimate(&self, item: i64) -> u64 {
        self.counters.range(..=item).map(|(_, c)| *c).sum()
    }

    /// Folds all counters of `other` into `self`.
    ///
    /// Both sketches must share the same capacity. Counters are folded in
    /// ascending key order, and the processed weight of the result is the sum
    /// of both inputs' processed weights, so the merged sketch carries the
    /// same estimation guarantees with respect to the concatenated stream.
    pub fn merge_from(&mut self, other: &CounterSketch) -> Result<()> {
        if self.capacity != other.capacity {
            return Err(Error::config(format!(
                "cannot merge sketches with capacities {} and {}",
                self.capacity, other.capacity
            )));
        }
        let processed = self
            .processed
            .checked_add(other.processed)
            .ok_or_else(|| Error::data("merged stream weight overflows u64".to_string()))?;
        for (&item, &count) in &other.counters {
            self.apply(item, count)?;
        }
        self.processed = processed;
        Ok(())
    }

    /// Iterates over `(key, counter)` pairs in ascending key order.
    pub fn counters(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counters.iter().map(|(&k, &c)| (k, c))
    }

    /// Applies one weighted arrival to the counter table without touching the
    /// processed-weight tally (shared by [`update`](Self::update) and
    /// [`merge_from`](Self::merge_from)).
    fn apply(&mut self, item: i64, weight: u64) -> Result<()> {
        if let Some(counter) = self.counters.get_mut(&item) {
            *counter = counter
                .checked_add(weight)
                .ok_or_else(|| Error::data(format!("counter for key {item} overflows u64")))?;
            return Ok(());
        }
        if self.counters.len() < self.capacity {
            self.counters.insert(item, weight);
            return Ok(());
        }
        let threshold = self.reduction_threshold();
        self.counters.retain(|_, c| *c > threshold);
        for counter in self.counters.values_mut() {
            *counter -= threshold;
        }
        // The arriving item is admitted only on this at-capacity path, and
        // only with the part of its weight that survives the reduction.
        if weight >= threshold && weight - threshold > 0 {
            self.counters.insert(item, weight - threshold);
        }
        Ok(())
    }

    /// The `capacity/2`-th largest counter value, counting multiplicity,
    /// taken over the current (full) counter table.
    fn reduction_threshold(&self) -> u64 {
        debug_assert_eq!(self.counters.len(), self.capacity);
        let mut values: Vec<u64> = self.counters.values().copied().collect();
        let index = self.capacity / 2 - 1;
        let (_, median, _) = values.select_nth_unstable_by(index, |a, b| b.cmp(a));
        *median
    }
}
