//! Compression estimate, built on Maurer's universal statistic.
//!
//! Bits are grouped into fixed-width blocks. The first `dict_blocks` blocks
//! seed a table of last-occurrence positions; for every later block the
//! `log2` distance back to its previous occurrence is averaged. The
//! 99%-lower-bounded mean is then matched against the expected statistic of
//! a source whose most likely block has probability `p` and whose remaining
//! blocks share `1 - p` evenly.

use super::{
    bisect_decreasing, check_length, clamp_entropy, require_binary, EstimateError, EstimateResult,
    EstimatorKind, EstimatorOptions, SampleSequence, COMPRESSION_MIN_LEN,
    COMPRESSION_RECOMMENDED_LEN, Z_99,
};

/// Variance correction factor for 6-bit blocks with a 1000-block dictionary.
const SIGMA_CORRECTION: f64 = 0.5907;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionParams {
    pub block_bits: u32,
    pub dict_blocks: usize,
}

impl Default for CompressionParams {
    fn default() -> Self {
        Self {
            block_bits: 6,
            dict_blocks: 1000,
        }
    }
}

impl CompressionParams {
    fn alphabet(&self) -> usize {
        1 << self.block_bits
    }

    /// Shortest bit length that leaves two test blocks after the dictionary.
    fn floor_bits(&self) -> usize {
        (self.dict_blocks + 2) * self.block_bits as usize
    }
}

/// Expected mean `log2` gap `G(z)` over `total_blocks` blocks when a given
/// block value occurs with probability `z`, normalized by the number of
/// test blocks.
///
/// The direct form sums over every test position `t` and every gap `u <= t`;
/// exchanging the sums makes it linear in `total_blocks`.
fn expected_log_gap(z: f64, dict_blocks: usize, total_blocks: usize, log_table: &[f64]) -> f64 {
    let test_blocks = total_blocks - dict_blocks;
    if z <= 0.0 {
        return 0.0;
    }
    let miss = 1.0 - z;
    let mut acc = 0.0;
    // miss^(u-1)
    let mut power = 1.0;
    for (u, &lg) in log_table.iter().enumerate().take(total_blocks + 1).skip(1) {
        if power < 1e-300 {
            break;
        }
        if u < total_blocks {
            let weight = test_blocks.min(total_blocks - u) as f64;
            acc += lg * z * z * power * weight;
        }
        if u > dict_blocks {
            acc += lg * z * power;
        }
        power *= miss;
    }
    acc / test_blocks as f64
}

fn log2_table(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|u| if u == 0 { 0.0 } else { (u as f64).log2() })
        .collect()
}

/// Expected compression statistic for most-likely-block probability `p`.
pub fn compression_forward(p: f64, params: CompressionParams, total_blocks: usize) -> f64 {
    let table = log2_table(total_blocks);
    forward_with_table(p, params, total_blocks, &table)
}

fn forward_with_table(
    p: f64,
    params: CompressionParams,
    total_blocks: usize,
    table: &[f64],
) -> f64 {
    let others = (params.alphabet() - 1) as f64;
    let q = (1.0 - p) / others;
    expected_log_gap(p, params.dict_blocks, total_blocks, table)
        + others * expected_log_gap(q, params.dict_blocks, total_blocks, table)
}

fn blocks(bits: &[u8], block_bits: u32) -> Vec<u32> {
    bits.chunks_exact(block_bits as usize)
        .map(|chunk| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect()
}

/// Mean and corrected standard deviation of the `log2` recurrence gaps.
fn gap_statistic(blocks: &[u32], params: CompressionParams) -> (f64, f64) {
    let mut last_seen = vec![0usize; params.alphabet()];
    for (i, &b) in blocks[..params.dict_blocks].iter().enumerate() {
        last_seen[b as usize] = i + 1;
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (offset, &b) in blocks[params.dict_blocks..].iter().enumerate() {
        let i = params.dict_blocks + offset + 1;
        let prev = last_seen[b as usize];
        let gap = if prev == 0 { i } else { i - prev };
        last_seen[b as usize] = i;
        let lg = (gap as f64).log2();
        sum += lg;
        sum_sq += lg * lg;
    }
    let v = (blocks.len() - params.dict_blocks) as f64;
    let mean = sum / v;
    let variance = (sum_sq / (v - 1.0) - mean * mean).max(0.0);
    (mean, SIGMA_CORRECTION * variance.sqrt())
}

/// Compression estimate over binary input, reported in bits per bit.
pub fn compression_estimate(
    seq: &SampleSequence,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimateError> {
    compression_estimate_with(seq, CompressionParams::default(), opts)
}

pub(crate) fn compression_estimate_with(
    seq: &SampleSequence,
    params: CompressionParams,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimateError> {
    require_binary(seq, EstimatorKind::Compression)?;
    let mut warnings = Vec::new();
    check_length(
        seq,
        EstimatorKind::Compression,
        COMPRESSION_MIN_LEN,
        params.floor_bits(),
        opts,
        &mut warnings,
    )?;
    if seq.len() < COMPRESSION_RECOMMENDED_LEN && warnings.is_empty() {
        warnings.push(format!(
            "{} bits is below the recommended {COMPRESSION_RECOMMENDED_LEN} for compression",
            seq.len()
        ));
    }

    let blocks = blocks(seq.samples(), params.block_bits);
    let (mean, sigma) = gap_statistic(&blocks, params);
    let test_blocks = (blocks.len() - params.dict_blocks) as f64;
    let lower = mean - Z_99 * sigma / test_blocks.sqrt();

    let table = log2_table(blocks.len());
    let floor_p = 1.0 / params.alphabet() as f64;
    let p = bisect_decreasing(
        |p| forward_with_table(p, params, blocks.len(), &table),
        lower,
        floor_p,
        1.0,
    );
    let h = -p.log2() / params.block_bits as f64;

    Ok(EstimateResult {
        estimator: EstimatorKind::Compression,
        min_entropy_per_sample: clamp_entropy(h, seq),
        statistic: mean,
        confidence_bound: lower,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::biased_bits;
    use super::*;

    /// `G(z)` straight from its double-sum definition, quadratic in length.
    fn expected_log_gap_direct(z: f64, dict: usize, total: usize) -> f64 {
        let mut acc = 0.0;
        for t in dict + 1..=total {
            for u in 1..=t {
                let f = if u < t {
                    z * z * (1.0 - z).powi(u as i32 - 1)
                } else {
                    z * (1.0 - z).powi(t as i32 - 1)
                };
                acc += (u as f64).log2() * f;
            }
        }
        acc / (total - dict) as f64
    }

    #[test]
    fn linear_form_matches_double_sum() {
        for (dict, total) in [(10usize, 60usize), (50, 300), (1, 5)] {
            let table = log2_table(total);
            for z in [0.01, 1.0 / 64.0, 0.1, 0.37, 0.8, 1.0] {
                let fast = expected_log_gap(z, dict, total, &table);
                let slow = expected_log_gap_direct(z, dict, total);
                assert!(
                    (fast - slow).abs() < 1e-10,
                    "z={z} dict={dict}: {fast} vs {slow}"
                );
            }
        }
    }

    #[test]
    fn forward_is_decreasing() {
        let params = CompressionParams::default();
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let p = 1.0 / 64.0 + (1.0 - 1.0 / 64.0) * i as f64 / 40.0;
            let f = compression_forward(p, params, 5000);
            assert!(f < prev, "p={p}");
            prev = f;
        }
        assert_eq!(compression_forward(1.0, params, 5000), 0.0);
    }

    #[test]
    fn uniform_forward_is_near_maurer_expectation() {
        // Maurer's expected value for 6-bit blocks is 5.2177052
        let f = compression_forward(1.0 / 64.0, CompressionParams::default(), 200_000);
        assert!((f - 5.2177052).abs() < 0.01, "{f}");
    }

    #[test]
    fn block_packing_is_msb_first() {
        assert_eq!(
            blocks(&[1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0], 6),
            vec![33, 63]
        );
    }

    #[test]
    fn constant_input_collapses() {
        let seq = SampleSequence::binary(vec![0; COMPRESSION_MIN_LEN]).unwrap();
        let r = compression_estimate(&seq, &Default::default()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.min_entropy_per_sample < 0.01);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn fair_coin() {
        let seq = SampleSequence::binary(biased_bits(1_000_000, 0.5, 51)).unwrap();
        let r = compression_estimate(&seq, &Default::default()).unwrap();
        assert!(r.warnings.is_empty());
        assert!((0.80..=1.0).contains(&r.min_entropy_per_sample), "{r:?}");
    }

    #[test]
    fn sparse_periodic_pattern_is_low() {
        let word: u64 = 1;
        let bits: Vec<u8> = (0..1_000_000)
            .map(|i| ((word >> (63 - i % 64)) & 1) as u8)
            .collect();
        let r = compression_estimate(&SampleSequence::binary(bits).unwrap(), &Default::default())
            .unwrap();
        assert!(r.min_entropy_per_sample < 0.1, "{r:?}");
    }

    #[test]
    fn inversion_reproduces_bound() {
        let params = CompressionParams::default();
        for (i, q) in [0.5, 0.6, 0.75, 0.9].into_iter().enumerate() {
            let seq = SampleSequence::binary(biased_bits(120_000, q, 60 + i as u64)).unwrap();
            let r = compression_estimate(&seq, &Default::default()).unwrap();
            let p = 2f64.powf(-r.min_entropy_per_sample * 6.0);
            let total = seq.len() / 6;
            let top = compression_forward(1.0 / 64.0, params, total);
            if r.confidence_bound > 0.0 && r.confidence_bound < top {
                let f = compression_forward(p, params, total);
                assert!((f - r.confidence_bound).abs() < 1e-6, "q={q}: {f} vs {r:?}");
            }
        }
    }

    #[test]
    fn length_floor_applies_even_with_override() {
        let opts = EstimatorOptions {
            allow_short: true,
            ..Default::default()
        };
        let seq = SampleSequence::binary(vec![0; 6000]).unwrap();
        assert!(matches!(
            compression_estimate(&seq, &opts),
            Err(EstimateError::TooShort { min: 6012, .. })
        ));
        let seq = SampleSequence::binary(biased_bits(20_000, 0.5, 1)).unwrap();
        assert!(compression_estimate(&seq, &Default::default()).is_err());
        let r = compression_estimate(&seq, &opts).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }
}
