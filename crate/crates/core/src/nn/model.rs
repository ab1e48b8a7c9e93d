//! Whole-network forward and backward passes over a [`Checkpoint`]'s
//! parameters.

use super::layers::{
    conv2d_backward_accumulate, conv2d_forward, dense_backward_accumulate, dense_forward,
    maxpool2d_backward, maxpool2d_forward, relu, relu_backward,
};
use super::loss::{cross_entropy, softmax, softmax_cross_entropy_grad};
use super::{Checkpoint, LayerSpec, ModelConfig, Tensor};
use crate::dataset::encode_one_hot;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `activations[i]` is the input of layer `i`; the last entry is the
    /// softmax output.
    pub activations: Vec<Tensor>,
    pool_argmax: Vec<Vec<usize>>,
}

impl Trace {
    pub fn probabilities(&self) -> &[f64] {
        self.activations.last().expect("non-empty trace").data()
    }

    pub fn logits(&self) -> &[f64] {
        self.activations[self.activations.len() - 2].data()
    }
}

/// He-style uniform initialization: weights from `U(-sqrt(6/fan_in), sqrt(6/fan_in))`
/// (variance `2/fan_in`), zero biases. Layers draw from one stream in order.
pub fn init_parameters(config: &ModelConfig, seed: u64) -> Result<Checkpoint> {
    let shapes = config.param_shapes()?;
    let mut rng = SeededRng::new(seed);
    let parameters = shapes
        .iter()
        .map(|s| {
            let limit = if s.fan_in > 0 {
                (6.0 / s.fan_in as f64).sqrt()
            } else {
                0.0
            };
            let mut p: Vec<f64> = (0..s.weights).map(|_| rng.uniform(-limit, limit)).collect();
            p.resize(s.total(), 0.0);
            p
        })
        .collect();
    Ok(Checkpoint::new(config.clone(), parameters))
}

fn split_params(params: &[f64], bias: usize) -> (&[f64], &[f64]) {
    params.split_at(params.len() - bias)
}

fn bias_len(layer: &LayerSpec) -> usize {
    match *layer {
        LayerSpec::Conv2d { out_channels, .. } => out_channels,
        LayerSpec::Dense { out_features } => out_features,
        _ => 0,
    }
}

pub fn forward(checkpoint: &Checkpoint, input: &Tensor) -> Result<Trace> {
    let config = &checkpoint.config;
    let (h, w, c) = config.input_shape;
    if input.shape() != [h, w, c] {
        return Err(Error::InvalidShape(format!(
            "input {:?} does not match model input {:?}",
            input.shape(),
            [h, w, c]
        )));
    }
    let mut activations = Vec::with_capacity(config.layers.len() + 1);
    let mut pool_argmax = Vec::new();
    activations.push(input.clone());
    for (layer, params) in config.layers.iter().zip(&checkpoint.parameters) {
        let x = activations.last().unwrap();
        let y = match *layer {
            LayerSpec::Conv2d {
                stride, padding, ..
            } => {
                let (wts, b) = split_params(params, bias_len(layer));
                conv2d_forward(x, wts, b, stride, padding)?
            }
            LayerSpec::MaxPool2d { window, stride } => {
                let (y, arg) = maxpool2d_forward(x, window, stride)?;
                pool_argmax.push(arg);
                y
            }
            LayerSpec::Relu => relu(x),
            LayerSpec::Flatten => Tensor::vector(x.data().to_vec()),
            LayerSpec::Dense { .. } => {
                let (wts, b) = split_params(params, bias_len(layer));
                Tensor::vector(dense_forward(x.data(), wts, b)?)
            }
            LayerSpec::Softmax => Tensor::vector(softmax(x.data())),
        };
        activations.push(y);
    }
    Ok(Trace {
        activations,
        pool_argmax,
    })
}

/// Cross-entropy of a trace against `target`.
pub fn trace_loss(trace: &Trace, target: usize) -> Result<f64> {
    let p = trace.probabilities();
    cross_entropy(p, &encode_one_hot(target, p.len())?)
}

/// Backpropagates softmax cross-entropy for `target` and adds the parameter
/// gradients into `grads` (same layout as the checkpoint parameters).
pub fn backward(
    checkpoint: &Checkpoint,
    trace: &Trace,
    target: usize,
    grads: &mut [Vec<f64>],
) -> Result<()> {
    let layers = &checkpoint.config.layers;
    let k = checkpoint.config.num_classes;
    if target >= k {
        return Err(Error::IndexOutOfRange {
            index: target,
            len: k,
        });
    }
    if grads.len() != layers.len() {
        return Err(Error::InvalidShape(
            "gradient buffer per layer expected".into(),
        ));
    }
    let mut grad = Tensor::vector(softmax_cross_entropy_grad(trace.probabilities(), target));
    let first_param_layer = layers
        .iter()
        .position(|l| bias_len(l) > 0)
        .unwrap_or(layers.len());
    let mut pool_idx = trace.pool_argmax.len();
    // softmax is fused into the loss gradient above
    for i in (0..layers.len() - 1).rev() {
        if i < first_param_layer {
            break;
        }
        let input = &trace.activations[i];
        let want_input = i > first_param_layer;
        grad = match layers[i] {
            LayerSpec::Conv2d {
                stride, padding, ..
            } => {
                let nb = bias_len(&layers[i]);
                let (wts, _) = split_params(&checkpoint.parameters[i], nb);
                let (gw, gb) = grads[i].split_at_mut(wts.len());
                let gi = conv2d_backward_accumulate(
                    &grad, input, wts, stride, padding, gw, gb, want_input,
                )?;
                match gi {
                    Some(g) => g,
                    None => break,
                }
            }
            LayerSpec::Dense { .. } => {
                let nb = bias_len(&layers[i]);
                let (wts, _) = split_params(&checkpoint.parameters[i], nb);
                let (gw, gb) = grads[i].split_at_mut(wts.len());
                match dense_backward_accumulate(grad.data(), input.data(), wts, gw, gb, want_input)?
                {
                    Some(g) => Tensor::vector(g),
                    None => break,
                }
            }
            LayerSpec::MaxPool2d { .. } => {
                pool_idx -= 1;
                maxpool2d_backward(&grad, &trace.pool_argmax[pool_idx], input.shape())?
            }
            LayerSpec::Relu => relu_backward(&grad, input)?,
            LayerSpec::Flatten => grad.reshape(input.shape().to_vec())?,
            LayerSpec::Softmax => unreachable!("softmax only as the last layer"),
        };
    }
    Ok(())
}

/// Zeroed gradient buffers shaped like the checkpoint parameters.
pub fn zero_grads(checkpoint: &Checkpoint) -> Vec<Vec<f64>> {
    checkpoint
        .parameters
        .iter()
        .map(|p| vec![0.0; p.len()])
        .collect()
}

/// Loss and parameter gradients for a single sample.
pub fn loss_and_gradients(
    checkpoint: &Checkpoint,
    input: &Tensor,
    target: usize,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let trace = forward(checkpoint, input)?;
    let loss = trace_loss(&trace, target)?;
    let mut grads = zero_grads(checkpoint);
    backward(checkpoint, &trace, target, &mut grads)?;
    Ok((loss, grads))
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Forward pass returning the predicted class and the probability vector.
pub fn predict(checkpoint: &Checkpoint, input: &Tensor) -> Result<(usize, Vec<f64>)> {
    let trace = forward(checkpoint, input)?;
    let probs = trace.probabilities().to_vec();
    Ok((argmax(&probs), probs))
}
