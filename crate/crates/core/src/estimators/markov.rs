use super::{
    check_length, clamp_entropy, require_binary, EstimateError, EstimateResult, EstimatorKind,
    EstimatorOptions, SampleSequence, MARKOV_MIN_LEN,
};

/// Length of the path whose probability bounds the per-sample entropy.
pub const MARKOV_PATH_LENGTH: usize = 128;

/// Initial and transition probabilities of a first-order chain fitted to a
/// binary sequence by counting.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BinaryChain {
    initial: [f64; 2],
    transition: [[f64; 2]; 2],
}

impl BinaryChain {
    fn fit(bits: &[u8]) -> Self {
        let ones = bits.iter().filter(|&&b| b == 1).count();
        let p1 = ones as f64 / bits.len() as f64;
        let mut counts = [[0u64; 2]; 2];
        for w in bits.windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1;
        }
        let mut transition = [[0.0; 2]; 2];
        for (row, c) in transition.iter_mut().zip(counts) {
            let total = c[0] + c[1];
            // a state never followed by anything keeps an all-zero row
            if total > 0 {
                row[0] = c[0] as f64 / total as f64;
                row[1] = c[1] as f64 / total as f64;
            }
        }
        Self {
            initial: [1.0 - p1, p1],
            transition,
        }
    }
}

/// `log2` of the probability of the most likely path of `steps` symbols
/// under the given chain, found by dynamic programming over end states.
pub fn most_likely_path_log2(initial: [f64; 2], transition: [[f64; 2]; 2], steps: usize) -> f64 {
    if steps == 0 {
        return 0.0;
    }
    let mut best = initial.map(f64::log2);
    for _ in 1..steps {
        let mut next = [f64::NEG_INFINITY; 2];
        for (to, slot) in next.iter_mut().enumerate() {
            for (from, &score) in best.iter().enumerate() {
                *slot = slot.max(score + transition[from][to].log2());
            }
        }
        best = next;
    }
    best[0].max(best[1])
}

/// First-order Markov estimate over binary input.
pub fn markov_estimate(
    seq: &SampleSequence,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimateError> {
    require_binary(seq, EstimatorKind::Markov)?;
    let mut warnings = Vec::new();
    check_length(
        seq,
        EstimatorKind::Markov,
        MARKOV_MIN_LEN,
        2,
        opts,
        &mut warnings,
    )?;

    let chain = BinaryChain::fit(seq.samples());
    let log_p = most_likely_path_log2(chain.initial, chain.transition, MARKOV_PATH_LENGTH);
    let p_max = log_p.exp2();
    let h = (-log_p / MARKOV_PATH_LENGTH as f64).min(1.0);

    Ok(EstimateResult {
        estimator: EstimatorKind::Markov,
        min_entropy_per_sample: clamp_entropy(h, seq),
        statistic: p_max,
        confidence_bound: p_max,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::biased_bits;
    use super::*;

    /// Probability of the likeliest sequence by enumerating every path.
    fn brute_force(initial: [f64; 2], t: [[f64; 2]; 2], steps: usize) -> f64 {
        (0u32..1 << steps)
            .map(|mask| {
                let bit = |i: usize| ((mask >> i) & 1) as usize;
                (1..steps).fold(initial[bit(0)], |acc, i| acc * t[bit(i - 1)][bit(i)])
            })
            .fold(0.0, f64::max)
    }

    /// The six candidate sequences that can be most likely for a binary chain.
    fn candidate_paths(initial: [f64; 2], t: [[f64; 2]; 2]) -> f64 {
        let [p0, p1] = initial;
        let n = MARKOV_PATH_LENGTH as i32;
        [
            p0 * t[0][0].powi(n - 1),
            p0 * t[0][1].powi(n / 2) * t[1][0].powi(n / 2 - 1),
            p0 * t[0][1] * t[1][1].powi(n - 2),
            p1 * t[1][0] * t[0][0].powi(n - 2),
            p1 * t[1][0].powi(n / 2) * t[0][1].powi(n / 2 - 1),
            p1 * t[1][1].powi(n - 1),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    #[test]
    fn dynamic_programming_matches_enumeration() {
        let chains = [
            ([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]]),
            ([0.3, 0.7], [[0.9, 0.1], [0.4, 0.6]]),
            ([0.8, 0.2], [[0.45, 0.55], [0.7, 0.3]]),
            ([0.0, 1.0], [[0.0, 0.0], [0.2, 0.8]]),
            ([0.6, 0.4], [[0.0, 1.0], [1.0, 0.0]]),
        ];
        for (init, t) in chains {
            for steps in 1..=12 {
                let dp = most_likely_path_log2(init, t, steps).exp2();
                let bf = brute_force(init, t, steps);
                assert!(
                    (dp - bf).abs() <= 1e-12 * bf.max(1e-300),
                    "{init:?} {t:?} {steps}"
                );
            }
            let dp = most_likely_path_log2(init, t, MARKOV_PATH_LENGTH).exp2();
            let cand = candidate_paths(init, t);
            assert!((dp - cand).abs() <= 1e-9 * cand, "{init:?} {t:?}");
        }
    }

    #[test]
    fn alternating_bits() {
        let bits: Vec<u8> = (0..1000).map(|i| (i % 2) as u8).collect();
        let r =
            markov_estimate(&SampleSequence::binary(bits).unwrap(), &Default::default()).unwrap();
        assert_eq!(r.statistic, 0.5);
        assert!((r.min_entropy_per_sample - 1.0 / 128.0).abs() < 1e-12);
    }

    #[test]
    fn constant_bits() {
        let r = markov_estimate(
            &SampleSequence::binary(vec![0; MARKOV_MIN_LEN]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.min_entropy_per_sample, 0.0);
    }

    #[test]
    fn iid_sources() {
        let fair = SampleSequence::binary(biased_bits(100_000, 0.5, 31)).unwrap();
        let h = markov_estimate(&fair, &Default::default())
            .unwrap()
            .min_entropy_per_sample;
        assert!((0.95..=1.0).contains(&h), "{h}");

        let biased = SampleSequence::binary(biased_bits(100_000, 0.75, 32)).unwrap();
        let h = markov_estimate(&biased, &Default::default())
            .unwrap()
            .min_entropy_per_sample;
        assert!((h - 0.415).abs() <= 0.05, "{h}");
    }

    #[test]
    fn rejects_non_binary() {
        let seq = SampleSequence::new(vec![0; 2000], 3).unwrap();
        assert!(matches!(
            markov_estimate(&seq, &Default::default()),
            Err(EstimateError::NonBinaryInput { .. })
        ));
    }
}
