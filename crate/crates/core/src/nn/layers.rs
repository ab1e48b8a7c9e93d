//! Forward and backward kernels for the layer vocabulary.
//!
//! Convolution weights are laid out `[kernel_row][kernel_col][in_channel][out_channel]`
//! and dense weights `[out_feature][in_feature]`.

use super::Tensor;
use crate::error::{Error, Result};

fn conv_out_dim(input: usize, kernel: usize, stride: usize, padding: usize) -> Result<usize> {
    if stride == 0 || kernel == 0 {
        return Err(Error::InvalidShape(
            "kernel and stride must be positive".into(),
        ));
    }
    let padded = input + 2 * padding;
    if kernel > padded {
        return Err(Error::InvalidShape(format!(
            "kernel {kernel} larger than padded input {padded}"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

/// Output `(height, width)` of a convolution or pooling window.
pub fn window_output(
    height: usize,
    width: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
) -> Result<(usize, usize)> {
    Ok((
        conv_out_dim(height, kernel, stride, padding)?,
        conv_out_dim(width, kernel, stride, padding)?,
    ))
}

fn check_conv(
    input: &Tensor,
    weights: &[f64],
    bias: &[f64],
    kernel: usize,
) -> Result<(usize, usize, usize, usize)> {
    let (h, w, cin) = input.hwc()?;
    let cout = bias.len();
    if cout == 0 || weights.len() != kernel * kernel * cin * cout {
        return Err(Error::InvalidShape(format!(
            "{} conv weights for kernel {kernel}, {cin} inputs, {cout} outputs",
            weights.len()
        )));
    }
    Ok((h, w, cin, cout))
}

/// Zero-padded cross-correlation:
/// `out[i,j,o] = bias[o] + sum in[i*s+di-p, j*s+dj-p, c] * w[di,dj,c,o]`.
pub fn conv2d_forward(
    input: &Tensor,
    weights: &[f64],
    bias: &[f64],
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let kernel = kernel_side(weights, input, bias)?;
    let (h, w, cin, cout) = check_conv(input, weights, bias, kernel)?;
    let (oh, ow) = window_output(h, w, kernel, stride, padding)?;
    let x = input.data();
    let mut out = vec![0.0; oh * ow * cout];
    for i in 0..oh {
        for j in 0..ow {
            let o_px = &mut out[(i * ow + j) * cout..][..cout];
            o_px.copy_from_slice(bias);
            for di in 0..kernel {
                let y = (i * stride + di) as isize - padding as isize;
                if y < 0 || y >= h as isize {
                    continue;
                }
                for dj in 0..kernel {
                    let xx = (j * stride + dj) as isize - padding as isize;
                    if xx < 0 || xx >= w as isize {
                        continue;
                    }
                    let in_px = &x[(y as usize * w + xx as usize) * cin..][..cin];
                    let w_base = (di * kernel + dj) * cin * cout;
                    for (c, &v) in in_px.iter().enumerate() {
                        let w_row = &weights[w_base + c * cout..][..cout];
                        for (o, &wt) in o_px.iter_mut().zip(w_row) {
                            *o += v * wt;
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(vec![oh, ow, cout], out)
}

// Recovers the square kernel side from the weight count.
fn kernel_side(weights: &[f64], input: &Tensor, bias: &[f64]) -> Result<usize> {
    let (_, _, cin) = input.hwc()?;
    let per = cin * bias.len();
    if per == 0 || !weights.len().is_multiple_of(per) {
        return Err(Error::InvalidShape(
            "conv weights do not match channels".into(),
        ));
    }
    let area = weights.len() / per;
    let k = (area as f64).sqrt().round() as usize;
    if k * k != area {
        return Err(Error::InvalidShape(format!(
            "{area} is not a square kernel area"
        )));
    }
    Ok(k)
}

/// Gradients of [`conv2d_forward`].
pub struct ConvGrads {
    pub input: Tensor,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

pub fn conv2d_backward(
    grad_out: &Tensor,
    input: &Tensor,
    weights: &[f64],
    out_channels: usize,
    stride: usize,
    padding: usize,
) -> Result<ConvGrads> {
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = vec![0.0; out_channels];
    let grad_in = conv2d_backward_accumulate(
        grad_out,
        input,
        weights,
        stride,
        padding,
        &mut grad_w,
        &mut grad_b,
        true,
    )?
    .expect("input gradient requested");
    Ok(ConvGrads {
        input: grad_in,
        weights: grad_w,
        bias: grad_b,
    })
}

/// Adds parameter gradients into `grad_w`/`grad_b` and, when asked, returns
/// the gradient with respect to the input.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv2d_backward_accumulate(
    grad_out: &Tensor,
    input: &Tensor,
    weights: &[f64],
    stride: usize,
    padding: usize,
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    want_input: bool,
) -> Result<Option<Tensor>> {
    let cout = grad_b.len();
    let (h, w, cin) = input.hwc()?;
    if cout == 0 || !weights.len().is_multiple_of(cin * cout) || grad_w.len() != weights.len() {
        return Err(Error::InvalidShape(
            "conv gradient buffers do not match weights".into(),
        ));
    }
    let kernel = ((weights.len() / (cin * cout)) as f64).sqrt().round() as usize;
    let (oh, ow) = window_output(h, w, kernel, stride, padding)?;
    if grad_out.shape() != [oh, ow, cout] {
        return Err(Error::InvalidShape(format!(
            "conv grad_out {:?}, expected {:?}",
            grad_out.shape(),
            [oh, ow, cout]
        )));
    }
    let x = input.data();
    let g = grad_out.data();
    let mut grad_in = if want_input {
        vec![0.0; x.len()]
    } else {
        Vec::new()
    };
    for i in 0..oh {
        for j in 0..ow {
            let g_px = &g[(i * ow + j) * cout..][..cout];
            for (b, &gv) in grad_b.iter_mut().zip(g_px) {
                *b += gv;
            }
            for di in 0..kernel {
                let y = (i * stride + di) as isize - padding as isize;
                if y < 0 || y >= h as isize {
                    continue;
                }
                for dj in 0..kernel {
                    let xx = (j * stride + dj) as isize - padding as isize;
                    if xx < 0 || xx >= w as isize {
                        continue;
                    }
                    let in_off = (y as usize * w + xx as usize) * cin;
                    let w_base = (di * kernel + dj) * cin * cout;
                    for c in 0..cin {
                        let v = x[in_off + c];
                        let range = w_base + c * cout..w_base + (c + 1) * cout;
                        for (gw, &gv) in grad_w[range.clone()].iter_mut().zip(g_px) {
                            *gw += v * gv;
                        }
                        if want_input {
                            let dot: f64 =
                                weights[range].iter().zip(g_px).map(|(a, b)| a * b).sum();
                            grad_in[in_off + c] += dot;
                        }
                    }
                }
            }
        }
    }
    Ok(want_input.then(|| Tensor::from_vec(input.shape().to_vec(), grad_in).expect("same shape")))
}

/// Channel-wise max over `window`×`window` patches. Returns the output and,
/// per output element, the flat input index that won. Ties go to the first
/// position in row-major scan order.
pub fn maxpool2d_forward(
    input: &Tensor,
    window: usize,
    stride: usize,
) -> Result<(Tensor, Vec<usize>)> {
    let (h, w, c) = input.hwc()?;
    if window > h || window > w {
        return Err(Error::InvalidShape(format!(
            "pool window {window} exceeds input {h}x{w}"
        )));
    }
    let (oh, ow) = window_output(h, w, window, stride, 0)?;
    let x = input.data();
    let mut out = Vec::with_capacity(oh * ow * c);
    let mut argmax = Vec::with_capacity(oh * ow * c);
    for i in 0..oh {
        for j in 0..ow {
            for ch in 0..c {
                let mut best = usize::MAX;
                for di in 0..window {
                    for dj in 0..window {
                        let idx = ((i * stride + di) * w + j * stride + dj) * c + ch;
                        if best == usize::MAX || x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok((Tensor::from_vec(vec![oh, ow, c], out)?, argmax))
}

/// Routes each output gradient to the input position recorded in `argmax`.
pub fn maxpool2d_backward(
    grad_out: &Tensor,
    argmax: &[usize],
    input_shape: &[usize],
) -> Result<Tensor> {
    if grad_out.len() != argmax.len() {
        return Err(Error::InvalidShape(
            "pool gradient does not match argmax".into(),
        ));
    }
    let mut grad_in = Tensor::zeros(input_shape.to_vec());
    let gi = grad_in.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        *gi.get_mut(idx)
            .ok_or_else(|| Error::InvalidShape("argmax outside input".into()))? += g;
    }
    Ok(grad_in)
}

pub fn relu(input: &Tensor) -> Tensor {
    let data = input.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::from_vec(input.shape().to_vec(), data).expect("same shape")
}

/// Passes gradient where the forward input was strictly positive.
pub fn relu_backward(grad_out: &Tensor, input: &Tensor) -> Result<Tensor> {
    if grad_out.shape() != input.shape() {
        return Err(Error::InvalidShape("relu gradient shape mismatch".into()));
    }
    let data = grad_out
        .data()
        .iter()
        .zip(input.data())
        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(input.shape().to_vec(), data)
}

/// `W·x + b` with `W` stored row-major as `[out][in]`.
pub fn dense_forward(input: &[f64], weights: &[f64], bias: &[f64]) -> Result<Vec<f64>> {
    let (n_in, n_out) = (input.len(), bias.len());
    if n_in == 0 || weights.len() != n_in * n_out {
        return Err(Error::InvalidShape(format!(
            "{} dense weights for {n_in} inputs and {n_out} outputs",
            weights.len()
        )));
    }
    Ok(weights
        .chunks_exact(n_in)
        .zip(bias)
        .map(|(row, &b)| b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>())
        .collect())
}

pub struct DenseGrads {
    pub input: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

pub fn dense_backward(grad_out: &[f64], input: &[f64], weights: &[f64]) -> Result<DenseGrads> {
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; grad_out.len()];
    let gi = dense_backward_accumulate(grad_out, input, weights, &mut gw, &mut gb, true)?
        .expect("input gradient requested");
    Ok(DenseGrads {
        input: gi,
        weights: gw,
        bias: gb,
    })
}

pub(crate) fn dense_backward_accumulate(
    grad_out: &[f64],
    input: &[f64],
    weights: &[f64],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    want_input: bool,
) -> Result<Option<Vec<f64>>> {
    let (n_in, n_out) = (input.len(), grad_out.len());
    if weights.len() != n_in * n_out || grad_w.len() != weights.len() || grad_b.len() != n_out {
        return Err(Error::InvalidShape(
            "dense gradient buffers do not match weights".into(),
        ));
    }
    let mut grad_in = if want_input {
        vec![0.0; n_in]
    } else {
        Vec::new()
    };
    for (o, &g) in grad_out.iter().enumerate() {
        grad_b[o] += g;
        let row = o * n_in..(o + 1) * n_in;
        for (gw, &x) in grad_w[row.clone()].iter_mut().zip(input) {
            *gw += g * x;
        }
        if want_input {
            for (gi, &w) in grad_in.iter_mut().zip(&weights[row]) {
                *gi += g * w;
            }
        }
    }
    Ok(want_input.then_some(grad_in))
}
