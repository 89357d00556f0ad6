use super::{
    check_length, clamp_entropy, upper_bound, EstimateError, EstimateResult, EstimatorKind,
    EstimatorOptions, SampleSequence, MCV_MIN_LEN,
};

/// Most common value estimate: `-log2` of the 99% upper bound on the
/// frequency of the modal symbol.
pub fn mcv_estimate(
    seq: &SampleSequence,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimateError> {
    let mut warnings = Vec::new();
    check_length(seq, EstimatorKind::Mcv, MCV_MIN_LEN, 2, opts, &mut warnings)?;

    let mut counts = [0usize; 256];
    for &s in seq.samples() {
        counts[s as usize] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let p_hat = max as f64 / seq.len() as f64;
    let p_upper = upper_bound(p_hat, seq.len());

    Ok(EstimateResult {
        estimator: EstimatorKind::Mcv,
        min_entropy_per_sample: clamp_entropy(-p_upper.log2(), seq),
        statistic: p_hat,
        confidence_bound: p_upper,
        warnings,
    })
}
