use super::model::{forward, loss_and_gradients, trace_loss};
use super::{Checkpoint, Tensor};
use crate::error::Result;

/// Deliberate corruption of the analytic gradient, for checking that the
/// harness notices broken backward passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientFault {
    None,
    /// Negate the analytic gradient of every parameter of one layer.
    FlipSign {
        layer: usize,
    },
}

/// Largest relative disagreement between backpropagated gradients and central
/// differences `(L(p+eps) - L(p-eps)) / 2eps`, over every parameter. The
/// denominator is `max(|analytic|, |numeric|, 1e-8)`.
pub fn gradient_check(
    checkpoint: &Checkpoint,
    input: &Tensor,
    target: usize,
    epsilon: f64,
) -> Result<f64> {
    gradient_check_with_fault(checkpoint, input, target, epsilon, GradientFault::None)
}

#[allow(clippy::needless_range_loop)]
pub fn gradient_check_with_fault(
    checkpoint: &Checkpoint,
    input: &Tensor,
    target: usize,
    epsilon: f64,
    fault: GradientFault,
) -> Result<f64> {
    let (_, mut analytic) = loss_and_gradients(checkpoint, input, target)?;
    if let GradientFault::FlipSign { layer } = fault {
        if let Some(g) = analytic.get_mut(layer) {
            g.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let mut probe = checkpoint.clone();
    let mut worst: f64 = 0.0;
    for layer in 0..probe.parameters.len() {
        for i in 0..probe.parameters[layer].len() {
            let orig = probe.parameters[layer][i];
            probe.parameters[layer][i] = orig + epsilon;
            let up = trace_loss(&forward(&probe, input)?, target)?;
            probe.parameters[layer][i] = orig - epsilon;
            let down = trace_loss(&forward(&probe, input)?, target)?;
            probe.parameters[layer][i] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            let a = analytic[layer][i];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(worst)
}
