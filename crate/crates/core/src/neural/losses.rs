//! Plain numeric losses and distributions mirroring the graph-fused ops.

use crate::error::{Error, Result};

/// Numerically stabilized softmax; invariant to additive shifts and sums
/// to 1 (within rounding) for any finite input.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// −log Σ_{i∈gold} p_i over a probability vector.
pub fn marginal_nll(p: &[f64], gold_set: &[usize]) -> Result<f64> {
    if gold_set.is_empty() {
        return Err(Error::EmptySequence("marginal_nll gold set"));
    }
    let mut total = 0.0;
    for &i in gold_set {
        let v = p
            .get(i)
            .ok_or_else(|| Error::Data(format!("marginal_nll: index {i} out of range")))?;
        total += v;
    }
    Ok(-total.ln())
}

/// −log p[gold].
pub fn categorical_nll(p: &[f64], gold_index: usize) -> Result<f64> {
    marginal_nll(p, &[gold_index])
}

/// −log P_start[start] − log P_end[end].
pub fn span_nll(p_start: &[f64], p_end: &[f64], gold_span: (usize, usize)) -> Result<f64> {
    Ok(categorical_nll(p_start, gold_span.0)? + categorical_nll(p_end, gold_span.1)?)
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_scores_give_uniform_distribution() {
        let p = softmax(&[2.0, 2.0, 2.0, 2.0]);
        for v in &p {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&[0.5, -1.0, 3.0]);
        let b = softmax(&[100.5, 99.0, 103.0]);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_preserves_argmax() {
        let scores = [0.3, -2.0, 5.1, 5.0];
        assert_eq!(argmax(&softmax(&scores)), argmax(&scores));
    }

    #[test]
    fn full_gold_set_has_zero_loss() {
        let p = softmax(&[1.0, 2.0, 3.0]);
        let loss = marginal_nll(&p, &[0, 1, 2]).unwrap();
        assert!(loss.abs() < 1e-12);
    }

    #[test]
    fn uniform_singleton_is_log_n() {
        let p = [0.25; 4];
        let loss = marginal_nll(&p, &[2]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
        assert!((loss - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn span_loss_of_uniform_is_two_log_n() {
        let p = [0.2; 5];
        let loss = span_nll(&p, &p, (1, 3)).unwrap();
        assert!((loss - 2.0 * 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn categorical_matches_singleton_marginal() {
        let p = softmax(&[0.1, 0.9, -0.4]);
        assert_eq!(
            categorical_nll(&p, 1).unwrap(),
            marginal_nll(&p, &[1]).unwrap()
        );
    }

    #[test]
    fn empty_gold_set_is_an_error() {
        assert!(marginal_nll(&[1.0], &[]).is_err());
    }

    #[test]
    fn certain_prediction_has_zero_loss() {
        let p = [0.0, 1.0, 0.0];
        assert_eq!(categorical_nll(&p, 1).unwrap(), 0.0);
    }
}
