use crate::error::{Error, Result};

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// `-ln p[target]` for a one-hot `target`, with `p` floored at 1e-12.
pub fn cross_entropy(probabilities: &[f64], one_hot_target: &[f64]) -> Result<f64> {
    if probabilities.len() != one_hot_target.len() {
        return Err(Error::InvalidShape(format!(
            "{} probabilities vs {} target entries",
            probabilities.len(),
            one_hot_target.len()
        )));
    }
    Ok(probabilities
        .iter()
        .zip(one_hot_target)
        .filter(|(_, &t)| t != 0.0)
        .map(|(&p, &t)| -t * p.max(PROBABILITY_FLOOR).ln())
        .sum())
}

/// Gradient of cross-entropy through softmax with respect to the logits:
/// `p - target`.
pub fn softmax_cross_entropy_grad(probabilities: &[f64], target: usize) -> Vec<f64> {
    let mut g = probabilities.to_vec();
    g[target] -= 1.0;
    g
}
