//! Min-entropy estimators for symbol and bit sequences.
//!
//! Five estimators are provided: most common value, collision, first-order
//! Markov, compression (Maurer-style) and t-tuple. Confidence bounds are
//! taken at the 99% level. The collision, Markov and compression estimators
//! only accept binary input.

mod collision;
mod compression;
mod markov;
mod mcv;
mod tuple;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_ordered, Execution};

pub use collision::{collision_estimate, collision_forward, collision_times};
pub use compression::{compression_estimate, compression_forward, CompressionParams};
pub use markov::{markov_estimate, most_likely_path_log2, MARKOV_PATH_LENGTH};
pub use mcv::mcv_estimate;
pub use tuple::{tuple_estimate, DEFAULT_MAX_TUPLE, TUPLE_MIN_OCCURRENCES};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.576;

pub const MCV_MIN_LEN: usize = 2;
pub const COLLISION_MIN_LEN: usize = 1_000;
pub const MARKOV_MIN_LEN: usize = 1_000;
pub const COMPRESSION_MIN_LEN: usize = 100_000;
pub const COMPRESSION_RECOMMENDED_LEN: usize = 1_000_000;
pub const TUPLE_MIN_LEN: usize = 1_000;

/// Bisection tolerance on `p` and iteration cap.
const BISECT_TOLERANCE: f64 = 1e-9;
const BISECT_MAX_ITER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("{estimator}: {len} samples, at least {min} required")]
    TooShort {
        estimator: EstimatorKind,
        len: usize,
        min: usize,
    },
    #[error("{estimator}: requires binary input, alphabet size is {alphabet}")]
    NonBinaryInput {
        estimator: EstimatorKind,
        alphabet: usize,
    },
    #[error("collision: no collision found in the sequence")]
    NoCollisions,
    #[error("alphabet size {0} outside 2..=256")]
    InvalidAlphabet(usize),
    #[error("sample {value} at index {index} is not below alphabet size {alphabet}")]
    SampleOutOfRange {
        index: usize,
        value: u8,
        alphabet: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Mcv,
    Collision,
    Markov,
    Compression,
    Tuple,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Mcv,
        EstimatorKind::Collision,
        EstimatorKind::Markov,
        EstimatorKind::Compression,
        EstimatorKind::Tuple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mcv => "mcv",
            EstimatorKind::Collision => "collision",
            EstimatorKind::Markov => "markov",
            EstimatorKind::Compression => "compression",
            EstimatorKind::Tuple => "tuple",
        }
    }

    pub fn binary_only(self) -> bool {
        matches!(
            self,
            EstimatorKind::Collision | EstimatorKind::Markov | EstimatorKind::Compression
        )
    }

    pub fn applies_to(self, alphabet_size: usize) -> bool {
        alphabet_size == 2 || !self.binary_only()
    }

    pub fn run(
        self,
        seq: &SampleSequence,
        opts: &EstimatorOptions,
    ) -> Result<EstimateResult, EstimateError> {
        match self {
            EstimatorKind::Mcv => mcv_estimate(seq, opts),
            EstimatorKind::Collision => collision_estimate(seq, opts),
            EstimatorKind::Markov => markov_estimate(seq, opts),
            EstimatorKind::Compression => compression_estimate(seq, opts),
            EstimatorKind::Tuple => tuple_estimate(seq, opts.max_tuple, opts),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown estimator {s:?}"))
    }
}

/// A sequence of symbols drawn from `0..alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSequence {
    samples: Vec<u8>,
    alphabet_size: usize,
}

impl SampleSequence {
    pub fn new(samples: Vec<u8>, alphabet_size: usize) -> Result<Self, EstimateError> {
        if !(2..=256).contains(&alphabet_size) {
            return Err(EstimateError::InvalidAlphabet(alphabet_size));
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, &v)| v as usize >= alphabet_size)
        {
            return Err(EstimateError::SampleOutOfRange {
                index,
                value,
                alphabet: alphabet_size,
            });
        }
        Ok(Self {
            samples,
            alphabet_size,
        })
    }

    pub fn binary(bits: Vec<u8>) -> Result<Self, EstimateError> {
        Self::new(bits, 2)
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Upper end of the estimate range, `log2(k)`.
    pub fn max_entropy(&self) -> f64 {
        (self.alphabet_size as f64).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorOptions {
    /// Downgrade minimum-length violations to warnings.
    pub allow_short: bool,
    /// Largest tuple size considered by the tuple estimator.
    pub max_tuple: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            allow_short: false,
            max_tuple: DEFAULT_MAX_TUPLE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimator: EstimatorKind,
    /// Bits per sample.
    pub min_entropy_per_sample: f64,
    pub statistic: f64,
    pub confidence_bound: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutcome {
    pub estimator: EstimatorKind,
    pub result: Result<EstimateResult, EstimateError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub outcomes: Vec<EstimatorOutcome>,
}

impl SuiteReport {
    /// Smallest estimate among the estimators that succeeded.
    pub fn minimum(&self) -> Option<f64> {
        self.successes()
            .map(|r| r.min_entropy_per_sample)
            .reduce(f64::min)
    }

    pub fn successes(&self) -> impl Iterator<Item = &EstimateResult> {
        self.outcomes.iter().filter_map(|o| o.result.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (EstimatorKind, &EstimateError)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (o.estimator, e)))
    }
}

/// Runs every estimator applicable to the sequence's alphabet: all five for
/// binary input, MCV and tuple otherwise.
pub fn estimate_all(seq: &SampleSequence, opts: &EstimatorOptions, exec: Execution) -> SuiteReport {
    let kinds: Vec<EstimatorKind> = EstimatorKind::ALL
        .into_iter()
        .filter(|k| k.applies_to(seq.alphabet_size()))
        .collect();
    estimate_selected(seq, &kinds, opts, exec)
}

/// Runs the given estimators. A failing estimator is reported in its
/// outcome slot and does not stop the others.
pub fn estimate_selected(
    seq: &SampleSequence,
    kinds: &[EstimatorKind],
    opts: &EstimatorOptions,
    exec: Execution,
) -> SuiteReport {
    let outcomes = map_ordered(kinds, exec, |&kind| EstimatorOutcome {
        estimator: kind,
        result: kind.run(seq, opts),
    });
    SuiteReport { outcomes }
}

/// Returns a warning when the sequence is shorter than `min` and the caller
/// allowed it, an error otherwise. Below `floor` the estimator cannot be
/// computed at all and the override does not apply.
fn check_length(
    seq: &SampleSequence,
    estimator: EstimatorKind,
    min: usize,
    floor: usize,
    opts: &EstimatorOptions,
    warnings: &mut Vec<String>,
) -> Result<(), EstimateError> {
    if seq.len() >= min {
        return Ok(());
    }
    if opts.allow_short && seq.len() >= floor {
        warnings.push(format!(
            "{} samples is below the {min} required for {estimator}; result is unreliable",
            seq.len()
        ));
        Ok(())
    } else {
        Err(EstimateError::TooShort {
            estimator,
            len: seq.len(),
            min: if opts.allow_short { floor } else { min },
        })
    }
}

fn require_binary(seq: &SampleSequence, estimator: EstimatorKind) -> Result<(), EstimateError> {
    if seq.alphabet_size() == 2 {
        Ok(())
    } else {
        Err(EstimateError::NonBinaryInput {
            estimator,
            alphabet: seq.alphabet_size(),
        })
    }
}

/// `p + z * sqrt(p(1-p)/(n-1))`, capped at 1.
fn upper_bound(p_hat: f64, n: usize) -> f64 {
    let spread = Z_99 * (p_hat * (1.0 - p_hat) / (n as f64 - 1.0)).sqrt();
    (p_hat + spread).min(1.0)
}

fn clamp_entropy(h: f64, seq: &SampleSequence) -> f64 {
    // + 0.0 folds -0.0 into 0.0
    h.clamp(0.0, seq.max_entropy()) + 0.0
}

/// Solves `f(p) = target` for a function non-increasing on `[lo, hi]`.
/// Targets above `f(lo)` map to `lo`, targets below `f(hi)` map to `hi`.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, hi: f64) -> f64 {
    if target >= f(lo) {
        return lo;
    }
    if target <= f(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// IID bits with `P(1) = q`.
    pub fn biased_bits(n: usize, q: f64, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| u8::from(rng.random::<f64>() < q)).collect()
    }

    pub fn uniform_symbols(n: usize, k: u32, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0..k) as u8).collect()
    }
}
