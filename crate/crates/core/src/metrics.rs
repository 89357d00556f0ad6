//! Expectation entropy of a password and the classical entropy family.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charspace::{CharClass, CharSpace, CharSpaceError, ClassProfile};

/// Absolute tolerance on `sum(p) == 1` when building a [`Distribution`].
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("profile has no characters, expectation entropy is undefined")]
    DegenerateProfile,
    #[error("support size must be at least 1")]
    InvalidSize,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

/// A finite discrete probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, MetricsError> {
        if probs.is_empty() {
            return Err(MetricsError::InvalidDistribution("no outcomes".into()));
        }
        if let Some(p) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(MetricsError::InvalidDistribution(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(MetricsError::InvalidDistribution(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes occurrence counts. At least one count must be nonzero.
    pub fn from_counts(counts: &[u64]) -> Result<Self, MetricsError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(MetricsError::InvalidDistribution(
                "all counts are zero".into(),
            ));
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn uniform(n: usize) -> Result<Self, MetricsError> {
        if n == 0 {
            return Err(MetricsError::InvalidSize);
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }
}

/// `E(c(P))` as an exact rational: the class-probability-weighted count.
pub fn expectation_exact(space: &CharSpace, profile: &ClassProfile) -> Ratio<u64> {
    CharClass::ALL
        .iter()
        .map(|&c| space.class_prob(c) * profile.count(c))
        .sum()
}

/// `E(c(P))` over the canonical space, as a float.
pub fn expectation(profile: &ClassProfile) -> f64 {
    ratio_to_f64(expectation_exact(CharSpace::english(), profile))
}

/// `log2(E(c(P))) / log2(|K|)` over the canonical space.
pub fn expectation_entropy(profile: &ClassProfile) -> Result<f64, MetricsError> {
    expectation_entropy_in(CharSpace::english(), profile)
}

pub fn expectation_entropy_in(
    space: &CharSpace,
    profile: &ClassProfile,
) -> Result<f64, MetricsError> {
    if profile.is_empty() {
        return Err(MetricsError::DegenerateProfile);
    }
    let e = expectation_exact(space, profile);
    Ok(ratio_to_f64(e).log2() / hartley(space.total_size())?)
}

fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Hartley entropy `log2(n)`.
pub fn hartley(n: u64) -> Result<f64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::InvalidSize);
    }
    Ok((n as f64).log2())
}

/// Shannon entropy in bits, with `0 * log2(0) = 0`.
pub fn shannon(dist: &Distribution) -> f64 {
    let h: f64 = dist
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

pub fn min_entropy(dist: &Distribution) -> f64 {
    let max = dist.probs.iter().copied().fold(0.0_f64, f64::max);
    -max.log2() + 0.0
}

/// Expected number of guesses of an attacker who tries outcomes in
/// decreasing order of probability.
pub fn guessing_entropy(dist: &Distribution) -> f64 {
    let mut sorted = dist.probs.clone();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted
        .iter()
        .enumerate()
        .map(|(i, p)| p * (i + 1) as f64)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PasswordScore {
    pub profile: ClassProfile,
    pub expectation: f64,
    pub expectation_entropy: f64,
    pub valid: bool,
}

impl PasswordScore {
    pub fn from_profile(space: &CharSpace, profile: ClassProfile) -> Result<Self, MetricsError> {
        Ok(Self {
            profile,
            expectation: ratio_to_f64(expectation_exact(space, &profile)),
            expectation_entropy: expectation_entropy_in(space, &profile)?,
            valid: space.is_valid(&profile),
        })
    }
}

/// Profiles and scores a password against the canonical space. The score is
/// computed for invalid passwords too; `valid` flags them.
pub fn score_password(password: &str) -> Result<PasswordScore, CharSpaceError> {
    let space = CharSpace::english();
    let profile = space.profile(password)?;
    Ok(PasswordScore::from_profile(space, profile)
        .expect("profile of a nonempty password has characters"))
}
