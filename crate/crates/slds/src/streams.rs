//! Sample-stream plumbing: reproducible synthetic generators, multi-source
//! splitting, file ingestion, and heuristic tail diagnostics.
//!
//! Synthetic generation is fully deterministic: a [`SourceStream`] couples a
//! [`Generator`] with a seed and a length, and identical triples reproduce
//! identical samples bit-for-bit across runs and platforms (the stream
//! cipher behind the RNG has a portable, stable output).
//!
//! [`tail_diagnostic`] answers the practical question "does this data look
//! consistent with the tail class I declared?". The checks are consciously
//! heuristic acceptance tests against explicit margins, not estimators:
//! a gaussian-class declaration is checked through the empirical second
//! moment, a stretched-exponential one through the empirical survival
//! function on a threshold grid.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::distances::KahanSum;
use crate::error::{Error, Result};
use crate::estimators::TailModel;

/// Default slack for [`tail_diagnostic`]'s acceptance margins.
pub const DEFAULT_DIAGNOSTIC_SLACK: f64 = 0.5;

/// A synthetic or file-backed source of samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Normal distribution with the given mean and standard deviation.
    Gaussian { mean: f64, sigma: f64 },
    /// Nonnegative draws with survival function `exp(-t^(1/alpha))`,
    /// produced by inverse-transform sampling; `alpha = 1` is the unit
    /// exponential, larger `alpha` stretches the tail.
    WeibullTail { alpha: f64 },
    /// Unit-rate exponential distribution.
    Exponential,
    /// Samples read from a text file (one number per line).
    File { path: PathBuf },
}

impl Generator {
    /// Checks the parameters are usable.
    pub fn validate(&self) -> Result<()> {
        match self {
            Generator::Gaussian { mean, sigma } => {
                if !mean.is_finite() {
                    return Err(Error::config(format!(
                        "gaussian mean must be finite, got {mean}"
                    )));
                }
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(Error::config(format!(
                        "gaussian deviation must be positive and finite, got {sigma}"
                    )));
                }
            }
            Generator::WeibullTail { alpha } => {
                if !alpha.is_finite() || *alpha <= 0.0 {
                    return Err(Error::config(format!(
                        "tail exponent parameter must be positive and finite, got {alpha}"
                    )));
                }
            }
            Generator::Exponential | Generator::File { .. } => {}
        }
        Ok(())
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// Parses the command-line generator grammar:
    /// `gaussian:MEAN,SIGMA`, `weibull:ALPHA`, `exponential`, `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = match s.split_once(':') {
            Some((tag, rest)) => (tag, Some(rest)),
            None => (s, None),
        };
        let generator = match (tag, rest) {
            ("gaussian", Some(params)) => {
                let (mean, sigma) = params.split_once(',').ok_or_else(|| {
                    Error::config(format!(
                        "gaussian generator needs MEAN,SIGMA parameters, got {params:?}"
                    ))
                })?;
                Generator::Gaussian {
                    mean: parse_param(mean, "gaussian mean")?,
                    sigma: parse_param(sigma, "gaussian deviation")?,
                }
            }
            ("weibull" | "weibull_tail", Some(params)) => Generator::WeibullTail {
                alpha: parse_param(params, "tail exponent parameter")?,
            },
            ("exponential", None) => Generator::Exponential,
            ("file", Some(path)) if !path.is_empty() => Generator::File {
                path: PathBuf::from(path),
            },
            _ => {
                return Err(Error::config(format!(
                    "unrecognized generator {s:?}; expected gaussian:MEAN,SIGMA, \
                     weibull:ALPHA, exponential, or file:PATH"
                )))
            }
        };
        generator.validate()?;
        Ok(generator)
    }
}

fn parse_param(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(format!("{what} is not a number: {s:?}")))
}

/// A generator bound to a seed and a sample count; the unit of reproducible
/// data in experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceStream {
    /// What to draw from.
    pub generator: Generator,
    /// Seed for the deterministic RNG (ignored by file sources).
    pub seed: u64,
    /// Number of samples to produce.
    pub length: usize,
}

impl SourceStream {
    /// Produces exactly `length` samples, deterministically for a fixed
    /// `(generator, seed, length)` triple.
    pub fn generate(&self) -> Result<Vec<f64>> {
        self.generator.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let samples = match &self.generator {
            Generator::Gaussian { mean, sigma } => {
                let normal = Normal::new(*mean, *sigma)
                    .map_err(|e| Error::config(format!("invalid gaussian parameters: {e}")))?;
                (0..self.length).map(|_| normal.sample(&mut rng)).collect()
            }
            Generator::WeibullTail { alpha } => (0..self.length)
                .map(|_| (-draw_unit_interval(&mut rng).ln()).powf(*alpha))
                .collect(),
            Generator::Exponential => (0..self.length)
                .map(|_| -draw_unit_interval(&mut rng).ln())
                .collect(),
            Generator::File { path } => {
                let all = read_samples(path)?;
                if all.len() < self.length {
                    return Err(Error::data(format!(
                        "file {} holds {} samples, {} requested",
                        path.display(),
                        all.len(),
                        self.length
                    )));
                }
                all[..self.length].to_vec()
            }
        };
        Ok(samples)
    }
}

/// Uniform draw from `(0, 1]`, safe to pass to `ln`.
fn draw_unit_interval(rng: &mut ChaCha12Rng) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Splits `samples` into `parts` contiguous sources whose in-order
/// concatenation is the input. The first `len % parts` sources receive one
/// extra sample.
pub fn split_sources(samples: &[f64], parts: usize) -> Result<Vec<&[f64]>> {
    if parts == 0 {
        return Err(Error::config(
            "stream must be split into at least one source".to_string(),
        ));
    }
    if parts > samples.len() {
        return Err(Error::config(format!(
            "cannot split {} samples into {} sources",
            samples.len(),
            parts
        )));
    }
    let base = samples.len() / parts;
    let extra = samples.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push(&samples[start..start + size]);
        start += size;
    }
    debug_assert_eq!(start, samples.len());
    Ok(out)
}

/// Reads samples from a UTF-8 text file: one finite decimal number per
/// line, blank lines skipped.
pub fn read_samples(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| {
        Error::data(format!("{} is not valid UTF-8 text", path.display()))
    })?;
    let mut samples = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|_| {
            Error::data(format!(
                "{} line {}: not a number: {trimmed:?}",
                path.display(),
                index + 1
            ))
        })?;
        if !value.is_finite() {
            return Err(Error::data(format!(
                "{} line {}: sample must be finite, got {value}",
                path.display(),
                index + 1
            )));
        }
        samples.push(value);
    }
    Ok(samples)
}

/// Reads a two-column `group,value` CSV into per-group sample vectors,
/// keyed by group name in sorted order.
///
/// A leading header row is detected (its value column does not parse as a
/// number) and skipped.
pub fn read_grouped_scores(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<f64>>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(map_csv_error)?;
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(map_csv_error)?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(index as u64 + 1);
        if record.len() != 2 {
            return Err(Error::data(format!(
                "{} line {line}: expected two columns (group,value), got {}",
                path.display(),
                record.len()
            )));
        }
        let group = record[0].to_string();
        let raw_value = &record[1];
        let value = match raw_value.parse::<f64>() {
            Ok(v) => v,
            // An unparseable value column in the first record is a header.
            Err(_) if index == 0 => continue,
            Err(_) => {
                return Err(Error::data(format!(
                    "{} line {line}: not a number: {raw_value:?}",
                    path.display()
                )))
            }
        };
        if group.is_empty() {
            return Err(Error::data(format!(
                "{} line {line}: empty group name",
                path.display()
            )));
        }
        if !value.is_finite() {
            return Err(Error::data(format!(
                "{} line {line}: score must be finite, got {value}",
                path.display()
            )));
        }
        groups.entry(group).or_default().push(value);
    }
    Ok(groups)
}

fn map_csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::data(format!("CSV read failed: {other:?}")),
        }
    } else {
        Error::data(format!("invalid CSV: {e}"))
    }
}

/// One threshold of a tail diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    /// Threshold probed (0 for the single second-moment check of the
    /// gaussian class).
    pub at: f64,
    /// Observed statistic: second moment, or survival fraction beyond `at`.
    pub observed: f64,
    /// Largest value consistent with the declared tail class.
    pub limit: f64,
    /// Whether the observation is within the limit.
    pub ok: bool,
}

/// Outcome of checking samples against a declared tail class.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticReport {
    /// The declared tail class that was checked.
    pub tail: TailModel,
    /// Number of samples examined.
    pub n: u64,
    /// Slack applied to the acceptance margins.
    pub slack: f64,
    /// Whether every check passed.
    pub consistent: bool,
    /// The individual checks.
    pub checks: Vec<TailCheck>,
}

impl DiagnosticReport {
    /// Largest probed threshold whose check failed, if any.
    pub fn largest_violation(&self) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| !c.ok)
            .map(|c| c.at)
            .fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.max(t))))
    }
}

/// Checks whether `samples` are plausibly drawn from a distribution in the
/// declared tail class. Heuristic: a pass is compatibility with the class's
/// explicit margins, not a proof of membership.
///
/// For the gaussian class the empirical second moment is compared against
/// `2 * (1 + slack)^2 * sigma^2` (the second moment any such distribution
/// can reach, widened by the slack). For the stretched-exponential class
/// the empirical survival function is compared against `1.5 * prefactor *
/// exp(-t^(1/alpha))` on a 64-point threshold grid reaching the largest
/// threshold where, at the declared tail, a couple dozen samples are still
/// expected beyond it (keeping the empirical survival estimate stable).
pub fn tail_diagnostic(samples: &[f64], tail: TailModel, slack: f64) -> Result<DiagnosticReport> {
    tail.validate()?;
    if samples.len() < 2 {
        return Err(Error::data(format!(
            "tail diagnostic needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !slack.is_finite() || slack < 0.0 {
        return Err(Error::config(format!(
            "diagnostic slack must be nonnegative and finite, got {slack}"
        )));
    }
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::data(format!("sample must be finite, got {x}")));
        }
    }
    let n = samples.len() as u64;
    let checks = match tail {
        TailModel::SubGaussian { sigma } => {
            let mut sum = KahanSum::default();
            for &x in samples {
                sum.add(x * x);
            }
            let second_moment = sum.value() / samples.len() as f64;
            let limit = 2.0 * (1.0 + slack) * (1.0 + slack) * sigma * sigma;
            vec![TailCheck {
                at: 0.0,
                observed: second_moment,
                limit,
                ok: second_moment <= limit,
            }]
        }
        TailModel::SubWeibull { alpha, prefactor } => {
            let deep_count = 24.0;
            let reach = prefactor * samples.len() as f64 / deep_count;
            if reach <= 1.0 {
                return Err(Error::data(format!(
                    "{} samples are too few to probe the declared tail",
                    samples.len()
                )));
            }
            let t_max = reach.ln().powf(alpha);
            let mut magnitudes: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
            magnitudes.sort_by(|a, b| a.partial_cmp(b).expect("finite samples compare"));
            let grid = 64;
            (1..=grid)
                .map(|j| {
                    let t = t_max * j as f64 / grid as f64;
                    let beyond = magnitudes.len() - magnitudes.partition_point(|&m| m <= t);
                    let observed = beyond as f64 / samples.len() as f64;
                    let limit = 1.5 * prefactor * (-t.powf(1.0 / alpha)).exp();
                    TailCheck {
                        at: t,
                        observed,
                        limit,
                        ok: observed <= limit,
                    }
                })
                .collect()
        }
    };
    Ok(DiagnosticReport {
        tail,
        n,
        slack,
        consistent: checks.iter().all(|c| c.ok),
        checks,
    })
}
