use std::collections::HashMap;

use super::{
    check_length, clamp_entropy, upper_bound, EstimateError, EstimateResult, EstimatorKind,
    EstimatorOptions, SampleSequence, TUPLE_MIN_LEN,
};

/// A tuple size is used only while its most common tuple occurs this often.
pub const TUPLE_MIN_OCCURRENCES: usize = 35;

pub const DEFAULT_MAX_TUPLE: usize = 128;

/// Count of the most frequent `t`-tuple for `t = 1, 2, ...` until the count
/// drops below [`TUPLE_MIN_OCCURRENCES`] or `max_t` is reached. The entry
/// for `t = 1` is always present.
///
/// Each window of length `t` is given a dense id derived from the id of its
/// length `t - 1` prefix and its last symbol, so a level costs one pass.
fn max_tuple_counts(samples: &[u8], max_t: usize) -> Vec<usize> {
    let mut ids: Vec<u32> = samples.iter().map(|&s| s as u32).collect();
    let mut distinct = 256usize;
    let mut out = Vec::new();
    for t in 1..=max_t.min(samples.len()) {
        let mut counts = vec![0usize; distinct];
        for &id in &ids {
            counts[id as usize] += 1;
        }
        let max = counts.into_iter().max().unwrap_or(0);
        if t > 1 && max < TUPLE_MIN_OCCURRENCES {
            break;
        }
        out.push(max);
        if max < TUPLE_MIN_OCCURRENCES || t == samples.len() {
            break;
        }

        // extend every window by one symbol; the last window falls off
        let mut table: HashMap<(u32, u8), u32> = HashMap::new();
        let next: Vec<u32> = ids[..ids.len() - 1]
            .iter()
            .zip(&samples[t..])
            .map(|(&prefix, &last)| {
                let fresh = table.len() as u32;
                *table.entry((prefix, last)).or_insert(fresh)
            })
            .collect();
        distinct = table.len();
        ids = next;
    }
    out
}

/// t-tuple estimate: the largest per-symbol probability implied by the most
/// common tuple of each usable size, bounded at 99%.
pub fn tuple_estimate(
    seq: &SampleSequence,
    max_t: usize,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimateError> {
    let mut warnings = Vec::new();
    check_length(
        seq,
        EstimatorKind::Tuple,
        TUPLE_MIN_LEN,
        2,
        opts,
        &mut warnings,
    )?;
    let max_t = max_t.max(1);

    let len = seq.len();
    let mut p_hat = 0.0_f64;
    let mut p_upper = 0.0_f64;
    for (i, &count) in max_tuple_counts(seq.samples(), max_t).iter().enumerate() {
        let t = i + 1;
        let p_t = (count as f64 / (len - t + 1) as f64).powf(1.0 / t as f64);
        p_hat = p_hat.max(p_t);
        p_upper = p_upper.max(upper_bound(p_t, len));
    }

    Ok(EstimateResult {
        estimator: EstimatorKind::Tuple,
        min_entropy_per_sample: clamp_entropy(-p_upper.log2(), seq),
        statistic: p_hat,
        confidence_bound: p_upper,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{biased_bits, uniform_symbols};
    use super::*;

    fn naive_max_counts(samples: &[u8], max_t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for t in 1..=max_t.min(samples.len()) {
            let mut counts: HashMap<&[u8], usize> = HashMap::new();
            for w in samples.windows(t) {
                *counts.entry(w).or_default() += 1;
            }
            let max = counts.values().copied().max().unwrap_or(0);
            if t > 1 && max < TUPLE_MIN_OCCURRENCES {
                break;
            }
            out.push(max);
            if max < TUPLE_MIN_OCCURRENCES {
                break;
            }
        }
        out
    }

    #[test]
    fn dense_ids_match_naive_counting() {
        for (seed, k) in [(1u64, 2u32), (2, 3), (3, 4), (4, 17)] {
            let samples = uniform_symbols(3_000, k, seed);
            assert_eq!(
                max_tuple_counts(&samples, 40),
                naive_max_counts(&samples, 40),
                "k={k}"
            );
        }
        let periodic: Vec<u8> = (0..500).map(|i| (i % 3) as u8).collect();
        assert_eq!(
            max_tuple_counts(&periodic, 20),
            naive_max_counts(&periodic, 20)
        );
    }

    #[test]
    fn constant_input() {
        let seq = SampleSequence::binary(vec![0; TUPLE_MIN_LEN]).unwrap();
        let r = tuple_estimate(&seq, DEFAULT_MAX_TUPLE, &Default::default()).unwrap();
        assert_eq!(r.min_entropy_per_sample, 0.0);
        assert_eq!(
            max_tuple_counts(seq.samples(), 5),
            vec![1000, 999, 998, 997, 996]
        );
    }

    #[test]
    fn fair_coin() {
        let seq = SampleSequence::binary(biased_bits(100_000, 0.5, 71)).unwrap();
        let h = tuple_estimate(&seq, DEFAULT_MAX_TUPLE, &Default::default())
            .unwrap()
            .min_entropy_per_sample;
        assert!((0.85..=1.0).contains(&h), "{h}");
    }

    #[test]
    fn uniform_bytes() {
        let seq = SampleSequence::new(uniform_symbols(100_000, 256, 72), 256).unwrap();
        let h = tuple_estimate(&seq, DEFAULT_MAX_TUPLE, &Default::default())
            .unwrap()
            .min_entropy_per_sample;
        assert!((6.0..=8.0).contains(&h), "{h}");
    }

    #[test]
    fn single_tuple_size_reduces_to_mcv() {
        let seq = SampleSequence::binary(biased_bits(10_000, 0.7, 73)).unwrap();
        let t1 = tuple_estimate(&seq, 1, &Default::default()).unwrap();
        let mcv = super::super::mcv_estimate(&seq, &Default::default()).unwrap();
        assert!((t1.min_entropy_per_sample - mcv.min_entropy_per_sample).abs() < 1e-12);
    }

    #[test]
    fn too_short() {
        let seq = SampleSequence::binary(vec![0; 10]).unwrap();
        assert!(matches!(
            tuple_estimate(&seq, 4, &Default::default()),
            Err(EstimateError::TooShort { .. })
        ));
    }
}
