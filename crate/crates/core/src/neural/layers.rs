//! Layer primitives with hand-written reverse passes.
//!
//! Every layer works on [`Activations`] laid out `[batch][channel][h][w]`.
//! Parameter gradients accumulate into the layer's `grad_*` buffers until
//! [`zero_grad`](Conv2d::zero_grad) is called.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::tensor::Activations;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Stride-1 convolution with zero "same" padding and a per-channel bias.
/// Kernel sizes must be odd. A `1 x k` kernel is a 1D convolution along
/// the width axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    /// `[out][in][kh][kw]`
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub grad_weight: Vec<f64>,
    pub grad_bias: Vec<f64>,
}

/// Index ranges `(dst_start, src_start, len)` of a shifted row copy:
/// `dst[x] += src[x + offset]` for every `x` where both are in bounds.
#[inline]
fn overlap(len: usize, offset: isize) -> (usize, usize, usize) {
    if offset >= 0 {
        let o = offset as usize;
        (0, o, len.saturating_sub(o))
    } else {
        let o = (-offset) as usize;
        (o, 0, len.saturating_sub(o))
    }
}

impl Conv2d {
    pub fn new(in_channels: usize, out_channels: usize, kernel_h: usize, kernel_w: usize) -> Self {
        assert!(kernel_h % 2 == 1 && kernel_w % 2 == 1, "kernel sizes must be odd");
        let n = out_channels * in_channels * kernel_h * kernel_w;
        Self {
            in_channels,
            out_channels,
            kernel_h,
            kernel_w,
            weight: vec![0.0; n],
            bias: vec![0.0; out_channels],
            grad_weight: vec![0.0; n],
            grad_bias: vec![0.0; out_channels],
        }
    }

    /// He-normal weights, zero bias.
    pub fn init<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let fan_in = (self.in_channels * self.kernel_h * self.kernel_w) as f64;
        let std = (2.0 / fan_in).sqrt();
        for w in &mut self.weight {
            let z: f64 = rng.sample(StandardNormal);
            *w = z * std;
        }
        self.bias.iter_mut().for_each(|b| *b = 0.0);
    }

    fn w_index(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + i) * self.kernel_h + ky) * self.kernel_w + kx
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// `2 · MACs` for an `h x w` map.
    pub fn flops(&self, h: usize, w: usize) -> u64 {
        2 * (self.weight.len() * h * w) as u64
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.iter_mut().for_each(|g| *g = 0.0);
        self.grad_bias.iter_mut().for_each(|g| *g = 0.0);
    }

    fn check_input(&self, x: &Activations) -> Result<()> {
        if x.channels != self.in_channels {
            return Err(Error::ShapeMismatch(format!(
                "convolution expects {} input channels, got {}",
                self.in_channels, x.channels
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Activations) -> Result<Activations> {
        self.check_input(x)?;
        let (h, w) = (x.height, x.width);
        let (ph, pw) = ((self.kernel_h / 2) as isize, (self.kernel_w / 2) as isize);
        let mut y = Activations::zeros(x.batch, self.out_channels, h, w);
        let in_len = x.sample_len();
        let out_len = y.sample_len();
        let hw = h * w;
        y.data
            .par_chunks_mut(out_len.max(1))
            .zip(x.data.par_chunks(in_len.max(1)))
            .for_each(|(ys, xs)| {
                for o in 0..self.out_channels {
                    let yo = &mut ys[o * hw..(o + 1) * hw];
                    yo.iter_mut().for_each(|v| *v = self.bias[o]);
                    for i in 0..self.in_channels {
                        let xi = &xs[i * hw..(i + 1) * hw];
                        for ky in 0..self.kernel_h {
                            let dy = ky as isize - ph;
                            let (y0, sy0, ny) = overlap(h, dy);
                            for kx in 0..self.kernel_w {
                                let wv = self.weight[self.w_index(o, i, ky, kx)];
                                if wv == 0.0 {
                                    continue;
                                }
                                let dx = kx as isize - pw;
                                let (x0, sx0, nx) = overlap(w, dx);
                                for r in 0..ny {
                                    let dst = &mut yo[(y0 + r) * w + x0..(y0 + r) * w + x0 + nx];
                                    let src = &xi[(sy0 + r) * w + sx0..(sy0 + r) * w + sx0 + nx];
                                    for (d, s) in dst.iter_mut().zip(src) {
                                        *d += wv * s;
                                    }
                                }
                            }
                        }
                    }
                }
            });
        Ok(y)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, x: &Activations, grad_out: &Activations) -> Result<Activations> {
        self.accumulate_grads(x, grad_out)?;
        Ok(self.input_grad(x, grad_out))
    }

    /// Adds the weight and bias gradients of one batch. Work is split over
    /// output channels; samples are summed in batch order.
    pub fn accumulate_grads(&mut self, x: &Activations, grad_out: &Activations) -> Result<()> {
        self.check_input(x)?;
        let (h, w) = (x.height, x.width);
        let hw = h * w;
        let (ph, pw) = ((self.kernel_h / 2) as isize, (self.kernel_w / 2) as isize);
        let in_len = x.sample_len();
        let out_len = grad_out.sample_len();
        let batch = x.batch;
        let per_out = self.in_channels * self.kernel_h * self.kernel_w;
        let (kh, kw, cin) = (self.kernel_h, self.kernel_w, self.in_channels);
        self.grad_weight
            .par_chunks_mut(per_out)
            .zip(self.grad_bias.par_iter_mut())
            .enumerate()
            .for_each(|(o, (gw, gb))| {
                for b in 0..batch {
                    let go = &grad_out.data[b * out_len + o * hw..b * out_len + (o + 1) * hw];
                    *gb += go.iter().sum::<f64>();
                    for i in 0..cin {
                        let xi = &x.data[b * in_len + i * hw..b * in_len + (i + 1) * hw];
                        for ky in 0..kh {
                            let (y0, sy0, ny) = overlap(h, ky as isize - ph);
                            for kx in 0..kw {
                                let (x0, sx0, nx) = overlap(w, kx as isize - pw);
                                let mut acc = 0.0;
                                for r in 0..ny {
                                    let g = &go[(y0 + r) * w + x0..(y0 + r) * w + x0 + nx];
                                    let s = &xi[(sy0 + r) * w + sx0..(sy0 + r) * w + sx0 + nx];
                                    acc += g.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                                }
                                gw[(i * kh + ky) * kw + kx] += acc;
                            }
                        }
                    }
                }
            });
        Ok(())
    }

    /// Gradient with respect to the input `x` (only its shape is used).
    pub fn input_grad(&self, x: &Activations, grad_out: &Activations) -> Activations {
        let (h, w) = (x.height, x.width);
        let hw = h * w;
        let (ph, pw) = ((self.kernel_h / 2) as isize, (self.kernel_w / 2) as isize);
        let in_len = x.sample_len();
        let out_len = grad_out.sample_len();
        let mut grad_in = x.same_shape();
        grad_in
            .data
            .par_chunks_mut(in_len.max(1))
            .zip(grad_out.data.par_chunks(out_len.max(1)))
            .for_each(|(gx, go)| {
                for o in 0..self.out_channels {
                    let g = &go[o * hw..(o + 1) * hw];
                    for i in 0..self.in_channels {
                        let gi = &mut gx[i * hw..(i + 1) * hw];
                        for ky in 0..self.kernel_h {
                            let (y0, sy0, ny) = overlap(h, ky as isize - ph);
                            for kx in 0..self.kernel_w {
                                let wv = self.weight[self.w_index(o, i, ky, kx)];
                                if wv == 0.0 {
                                    continue;
                                }
                                let (x0, sx0, nx) = overlap(w, kx as isize - pw);
                                for r in 0..ny {
                                    let src = &g[(y0 + r) * w + x0..(y0 + r) * w + x0 + nx];
                                    let dst = &mut gi[(sy0 + r) * w + sx0..(sy0 + r) * w + sx0 + nx];
                                    for (d, s) in dst.iter_mut().zip(src) {
                                        *d += wv * s;
                                    }
                                }
                            }
                        }
                    }
                }
            });
        grad_in
    }
}

pub const BN_EPSILON: f64 = 1e-5;
/// Weight of the newest batch in the running statistics.
pub const BN_MOMENTUM: f64 = 0.1;

/// Per-channel batch normalization with affine output.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub channels: usize,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub grad_gamma: Vec<f64>,
    pub grad_beta: Vec<f64>,
}

/// Values kept from a train-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    x_hat: Vec<f64>,
    inv_std: Vec<f64>,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self {
            channels,
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            grad_gamma: vec![0.0; channels],
            grad_beta: vec![0.0; channels],
        }
    }

    pub fn param_count(&self) -> usize {
        2 * self.channels
    }

    pub fn zero_grad(&mut self) {
        self.grad_gamma.iter_mut().for_each(|g| *g = 0.0);
        self.grad_beta.iter_mut().for_each(|g| *g = 0.0);
    }

    fn check(&self, x: &Activations) -> Result<()> {
        if x.channels != self.channels {
            return Err(Error::ShapeMismatch(format!(
                "batch norm expects {} channels, got {}",
                self.channels, x.channels
            )));
        }
        Ok(())
    }

    pub fn forward_infer(&self, x: &Activations) -> Result<Activations> {
        self.check(x)?;
        let hw = x.spatial();
        let mut y = x.clone();
        for (idx, chunk) in y.data.chunks_mut(hw.max(1)).enumerate() {
            let c = idx % self.channels;
            let scale = self.gamma[c] / (self.running_var[c] + BN_EPSILON).sqrt();
            let shift = self.beta[c] - self.running_mean[c] * scale;
            chunk.iter_mut().for_each(|v| *v = *v * scale + shift);
        }
        Ok(y)
    }

    /// Standardizes with batch statistics and updates the running ones.
    pub fn forward_train(&mut self, x: &Activations) -> Result<(Activations, BatchNormCache)> {
        self.check(x)?;
        if x.batch < 2 {
            return Err(Error::DegenerateBatch(x.batch));
        }
        let hw = x.spatial();
        let count = (x.batch * hw) as f64;
        let len = x.sample_len();
        let mut mean = vec![0.0; self.channels];
        let mut var = vec![0.0; self.channels];
        for b in 0..x.batch {
            for c in 0..self.channels {
                let s = &x.data[b * len + c * hw..b * len + (c + 1) * hw];
                mean[c] += s.iter().sum::<f64>();
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        for b in 0..x.batch {
            for c in 0..self.channels {
                let s = &x.data[b * len + c * hw..b * len + (c + 1) * hw];
                var[c] += s.iter().map(|v| (v - mean[c]).powi(2)).sum::<f64>();
            }
        }
        var.iter_mut().for_each(|v| *v /= count);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPSILON).sqrt()).collect();

        let mut x_hat = x.data.clone();
        let mut y = x.same_shape();
        for b in 0..x.batch {
            for c in 0..self.channels {
                let range = b * len + c * hw..b * len + (c + 1) * hw;
                for (xh, yv) in x_hat[range.clone()].iter_mut().zip(&mut y.data[range]) {
                    *xh = (*xh - mean[c]) * inv_std[c];
                    *yv = self.gamma[c] * *xh + self.beta[c];
                }
            }
        }
        let unbias = if count > 1.0 { count / (count - 1.0) } else { 1.0 };
        for c in 0..self.channels {
            self.running_mean[c] = (1.0 - BN_MOMENTUM) * self.running_mean[c] + BN_MOMENTUM * mean[c];
            self.running_var[c] =
                (1.0 - BN_MOMENTUM) * self.running_var[c] + BN_MOMENTUM * var[c] * unbias;
        }
        Ok((y, BatchNormCache { x_hat, inv_std }))
    }

    pub fn backward(&mut self, cache: &BatchNormCache, grad_out: &Activations) -> Activations {
        let hw = grad_out.spatial();
        let len = grad_out.sample_len();
        let count = (grad_out.batch * hw) as f64;
        let mut sum_g = vec![0.0; self.channels];
        let mut sum_gx = vec![0.0; self.channels];
        for b in 0..grad_out.batch {
            for c in 0..self.channels {
                let range = b * len + c * hw..b * len + (c + 1) * hw;
                let g = &grad_out.data[range.clone()];
                let xh = &cache.x_hat[range];
                sum_g[c] += g.iter().sum::<f64>();
                sum_gx[c] += g.iter().zip(xh).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        for c in 0..self.channels {
            self.grad_gamma[c] += sum_gx[c];
            self.grad_beta[c] += sum_g[c];
        }
        let mut grad_in = grad_out.same_shape();
        for b in 0..grad_out.batch {
            for c in 0..self.channels {
                let k = self.gamma[c] * cache.inv_std[c] / count;
                let range = b * len + c * hw..b * len + (c + 1) * hw;
                let g = &grad_out.data[range.clone()];
                let xh = &cache.x_hat[range.clone()];
                for ((d, gv), xv) in grad_in.data[range].iter_mut().zip(g).zip(xh) {
                    *d = k * (count * gv - sum_g[c] - xv * sum_gx[c]);
                }
            }
        }
        grad_in
    }
}

pub fn relu(x: &Activations) -> Activations {
    let mut y = x.clone();
    y.data.iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

/// Gradient through a ReLU given its output.
pub fn relu_backward(output: &Activations, grad_out: &Activations) -> Activations {
    let mut g = grad_out.clone();
    for (gv, &y) in g.data.iter_mut().zip(&output.data) {
        if y <= 0.0 {
            *gv = 0.0;
        }
    }
    g
}

/// Mean over the spatial positions of each channel: `(B, C, H, W) -> (B, C)`.
pub fn global_average_pool(x: &Activations) -> Vec<f64> {
    let hw = x.spatial();
    x.data
        .chunks(hw.max(1))
        .map(|c| c.iter().sum::<f64>() / hw as f64)
        .collect()
}

pub fn global_average_pool_backward(grad: &[f64], shape: &Activations) -> Activations {
    let hw = shape.spatial();
    let mut out = shape.same_shape();
    for (chunk, g) in out.data.chunks_mut(hw.max(1)).zip(grad) {
        let v = g / hw as f64;
        chunk.iter_mut().for_each(|d| *d = v);
    }
    out
}

/// Fully connected layer to a single output.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub weight: Vec<f64>,
    pub bias: f64,
    pub grad_weight: Vec<f64>,
    pub grad_bias: f64,
}

impl Dense {
    pub fn new(inputs: usize) -> Self {
        Self {
            inputs,
            weight: vec![0.0; inputs],
            bias: 0.0,
            grad_weight: vec![0.0; inputs],
            grad_bias: 0.0,
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let limit = (6.0 / (self.inputs as f64 + 1.0)).sqrt();
        for w in &mut self.weight {
            *w = rng.gen_range(-limit..limit);
        }
        self.bias = 0.0;
    }

    pub fn param_count(&self) -> usize {
        self.inputs + 1
    }

    pub fn zero_grad(&mut self) {
        self.grad_weight.iter_mut().for_each(|g| *g = 0.0);
        self.grad_bias = 0.0;
    }

    /// `features` is `(batch, inputs)` row-major.
    pub fn forward(&self, features: &[f64]) -> Vec<f64> {
        features
            .chunks(self.inputs)
            .map(|f| self.bias + f.iter().zip(&self.weight).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn backward(&mut self, features: &[f64], grad_out: &[f64]) -> Vec<f64> {
        let mut grad_in = vec![0.0; features.len()];
        for ((f, g), gi) in features
            .chunks(self.inputs)
            .zip(grad_out)
            .zip(grad_in.chunks_mut(self.inputs))
        {
            self.grad_bias += g;
            for k in 0..self.inputs {
                self.grad_weight[k] += g * f[k];
                gi[k] = g * self.weight[k];
            }
        }
        grad_in
    }
}
