use super::{
    bisect_decreasing, check_length, clamp_entropy, require_binary, EstimateError, EstimateResult,
    EstimatorKind, EstimatorOptions, SampleSequence, COLLISION_MIN_LEN, Z_99,
};

/// Splits the sequence into successive runs ending at the first repeated
/// value and returns the length of each run. A trailing run without a
/// repeat is dropped.
pub fn collision_times(samples: &[u8]) -> Vec<u32> {
    let mut times = Vec::with_capacity(samples.len() / 2);
    let mut seen = [false; 256];
    let mut start = 0;
    for (j, &s) in samples.iter().enumerate() {
        if seen[s as usize] {
            times.push((j - start + 1) as u32);
            seen = [false; 256];
            start = j + 1;
        } else {
            seen[s as usize] = true;
        }
    }
    times
}

/// Expected time to the first collision of IID binary samples whose most
/// likely value has probability `p` (`0.5 <= p <= 1`).
///
/// The first collision happens at sample 2 with probability `p^2 + q^2` and
/// at sample 3 otherwise, giving `2 + 2pq`. This is the binary case of the
/// Hagerty-Draper relation, written in a form that stays stable as `p -> 1`.
pub fn collision_forward(p: f64) -> f64 {
    2.0 + 2.0 * p * (1.0 - p)
}

/// Collision estimate over binary input.
pub fn collision_estimate(
    seq: &SampleSequence,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimateError> {
    require_binary(seq, EstimatorKind::Collision)?;
    let mut warnings = Vec::new();
    check_length(
        seq,
        EstimatorKind::Collision,
        COLLISION_MIN_LEN,
        3,
        opts,
        &mut warnings,
    )?;

    let times = collision_times(seq.samples());
    if times.is_empty() {
        return Err(EstimateError::NoCollisions);
    }
    let v = times.len() as f64;
    let mean = times.iter().map(|&t| t as f64).sum::<f64>() / v;
    let sigma = if times.len() > 1 {
        let ss: f64 = times.iter().map(|&t| (t as f64 - mean).powi(2)).sum();
        (ss / (v - 1.0)).sqrt()
    } else {
        0.0
    };
    let lower = mean - Z_99 * sigma / v.sqrt();
    let p = bisect_decreasing(collision_forward, lower, 0.5, 1.0);

    Ok(EstimateResult {
        estimator: EstimatorKind::Collision,
        min_entropy_per_sample: clamp_entropy(-p.log2(), seq),
        statistic: mean,
        confidence_bound: lower,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::biased_bits;
    use super::*;

    /// The general Hagerty-Draper expression with
    /// `F(q) = Gamma(3, 1/q) q^3 e^(1/q) = 2q^3 + 2q^2 + q`.
    fn hagerty_draper(p: f64) -> f64 {
        let q = 1.0 - p;
        let f = 2.0 * q.powi(3) + 2.0 * q * q + q;
        let half_diff = 0.5 * (1.0 / p - 1.0 / q);
        p / (q * q) * (1.0 + half_diff) * f - p / q * half_diff
    }

    /// Enumerates the first-collision time distribution directly.
    fn enumerated_mean(p: f64) -> f64 {
        let q = 1.0 - p;
        let mut mean = 0.0;
        for first in 0..2 {
            for second in 0..2 {
                let pr = |b: i32| if b == 1 { p } else { q };
                let prob = pr(first) * pr(second);
                mean += prob * if first == second { 2.0 } else { 3.0 };
            }
        }
        mean
    }

    #[test]
    fn forward_matches_independent_routes() {
        for i in 0..=98 {
            let p = 0.5 + i as f64 * 0.005;
            let f = collision_forward(p);
            assert!((f - enumerated_mean(p)).abs() < 1e-12, "p={p}");
            assert!((f - hagerty_draper(p)).abs() < 1e-9, "p={p}");
        }
        assert_eq!(collision_forward(1.0), 2.0);
        assert_eq!(collision_forward(0.5), 2.5);
    }

    #[test]
    fn collision_times_split_on_repeats() {
        assert_eq!(collision_times(&[0, 0, 1, 0, 1, 1, 0]), vec![2, 3]);
        assert_eq!(collision_times(&[0, 0, 1, 0, 1, 1, 0, 0]), vec![2, 3, 3]);
        assert_eq!(collision_times(&[0, 1]), Vec::<u32>::new());
        assert_eq!(collision_times(&[2, 5, 7, 5, 1]), vec![4]);
    }

    #[test]
    fn constant_input_has_no_entropy() {
        let seq = SampleSequence::binary(vec![1; COLLISION_MIN_LEN]).unwrap();
        let r = collision_estimate(&seq, &Default::default()).unwrap();
        assert_eq!(r.statistic, 2.0);
        assert_eq!(r.min_entropy_per_sample, 0.0);
    }

    #[test]
    fn fair_coin() {
        let seq = SampleSequence::binary(biased_bits(100_000, 0.5, 21)).unwrap();
        let h = collision_estimate(&seq, &Default::default())
            .unwrap()
            .min_entropy_per_sample;
        assert!((0.80..=1.0).contains(&h), "{h}");
    }

    #[test]
    fn biased_coin() {
        let seq = SampleSequence::binary(biased_bits(100_000, 0.75, 22)).unwrap();
        let h = collision_estimate(&seq, &Default::default())
            .unwrap()
            .min_entropy_per_sample;
        assert!((h - 0.415).abs() <= 0.08, "{h}");
    }

    #[test]
    fn inversion_reproduces_bound() {
        for (i, q) in [0.5, 0.6, 0.7, 0.8, 0.9].into_iter().enumerate() {
            let seq = SampleSequence::binary(biased_bits(20_000, q, 40 + i as u64)).unwrap();
            let r = collision_estimate(&seq, &Default::default()).unwrap();
            let p = 2f64.powf(-r.min_entropy_per_sample);
            if r.confidence_bound < 2.5 && r.confidence_bound > 2.0 {
                assert!((collision_forward(p) - r.confidence_bound).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_non_binary_and_short() {
        let seq = SampleSequence::new(vec![0; 2000], 4).unwrap();
        assert!(matches!(
            collision_estimate(&seq, &Default::default()),
            Err(EstimateError::NonBinaryInput { alphabet: 4, .. })
        ));
        let seq = SampleSequence::binary(vec![0; 999]).unwrap();
        assert!(matches!(
            collision_estimate(&seq, &Default::default()),
            Err(EstimateError::TooShort { min: 1000, .. })
        ));
        let opts = EstimatorOptions {
            allow_short: true,
            ..Default::default()
        };
        let r = collision_estimate(&seq, &opts).unwrap();
        assert_eq!(r.warnings.len(), 1);
    }
}
