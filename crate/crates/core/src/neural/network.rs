//! Residual network: stem, residual blocks, pooled dense head.
//!
//! FLOP convention: a convolution or dense layer costs two operations per
//! multiply-accumulate (bias adds are not counted separately); batch
//! normalization and ReLU cost two per element; the residual addition and
//! the global average pool cost one per element.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::arch::{ArchitectureVariant, Dimensionality};
use super::layers::{
    global_average_pool, global_average_pool_backward, relu, relu_backward, BatchNorm,
    BatchNormCache, Conv2d, Dense, Mode,
};
use super::tensor::Activations;
use crate::error::{Error, Result};

/// Convolution followed by batch normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBn {
    pub conv: Conv2d,
    pub bn: BatchNorm,
}

impl ConvBn {
    fn new(cin: usize, cout: usize, kernel: (usize, usize)) -> Self {
        Self {
            conv: Conv2d::new(cin, cout, kernel.0, kernel.1),
            bn: BatchNorm::new(cout),
        }
    }

    fn param_count(&self) -> usize {
        self.conv.param_count() + self.bn.param_count()
    }

    fn flops(&self, hw: usize) -> u64 {
        self.conv.flops(1, hw) + 2 * (self.bn.channels * hw) as u64
    }

    fn forward_infer(&self, x: &Activations) -> Result<Activations> {
        self.bn.forward_infer(&self.conv.forward(x)?)
    }

    fn forward_train(&mut self, x: &Activations) -> Result<(Activations, BatchNormCache)> {
        let y = self.conv.forward(x)?;
        self.bn.forward_train(&y)
    }

    fn backward(
        &mut self,
        x: &Activations,
        cache: &BatchNormCache,
        grad: &Activations,
        need_input: bool,
    ) -> Result<Option<Activations>> {
        let g = self.bn.backward(cache, grad);
        self.conv.accumulate_grads(x, &g)?;
        Ok(need_input.then(|| self.conv.input_grad(x, &g)))
    }

    fn zero_grad(&mut self) {
        self.conv.zero_grad();
        self.bn.zero_grad();
    }
}

/// `relu(bn(conv(relu(bn(conv(x))))) + skip(x))`, where `skip` is the
/// identity or, when the channel count changes, a 1x1 convolution with
/// batch normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub first: ConvBn,
    pub second: ConvBn,
    pub projection: Option<ConvBn>,
}

impl Block {
    fn new(cin: usize, cout: usize, kernel: (usize, usize)) -> Self {
        Self {
            first: ConvBn::new(cin, cout, kernel),
            second: ConvBn::new(cout, cout, kernel),
            projection: (cin != cout).then(|| ConvBn::new(cin, cout, (1, 1))),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.first.conv.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.first.conv.out_channels
    }

    fn param_count(&self) -> usize {
        self.first.param_count()
            + self.second.param_count()
            + self.projection.as_ref().map_or(0, ConvBn::param_count)
    }

    fn flops(&self, hw: usize) -> u64 {
        let c = (self.out_channels() * hw) as u64;
        self.first.flops(hw)
            + 2 * c
            + self.second.flops(hw)
            + self.projection.as_ref().map_or(0, |p| p.flops(hw))
            + c
            + 2 * c
    }

    fn forward_infer(&self, x: &Activations) -> Result<Activations> {
        let r1 = relu(&self.first.forward_infer(x)?);
        let mut y = self.second.forward_infer(&r1)?;
        let skip = match &self.projection {
            Some(p) => p.forward_infer(x)?,
            None => x.clone(),
        };
        add_assign(&mut y, &skip);
        Ok(relu(&y))
    }

    fn forward_train(&mut self, x: Activations) -> Result<(Activations, BlockTape)> {
        let (a1, c1) = self.first.forward_train(&x)?;
        let r1 = relu(&a1);
        let (mut y, c2) = self.second.forward_train(&r1)?;
        let cp = match &mut self.projection {
            Some(p) => {
                let (s, cp) = p.forward_train(&x)?;
                add_assign(&mut y, &s);
                Some(cp)
            }
            None => {
                add_assign(&mut y, &x);
                None
            }
        };
        let out = relu(&y);
        Ok((
            out.clone(),
            BlockTape {
                input: x,
                r1,
                c1,
                c2,
                cp,
                out,
            },
        ))
    }

    fn backward(&mut self, tape: &BlockTape, grad: &Activations) -> Result<Activations> {
        let g_sum = relu_backward(&tape.out, grad);
        let g_r1 = self
            .second
            .backward(&tape.r1, &tape.c2, &g_sum, true)?
            .expect("input gradient");
        let g_a1 = relu_backward(&tape.r1, &g_r1);
        let mut g_in = self
            .first
            .backward(&tape.input, &tape.c1, &g_a1, true)?
            .expect("input gradient");
        match (&mut self.projection, &tape.cp) {
            (Some(p), Some(cp)) => {
                let g = p.backward(&tape.input, cp, &g_sum, true)?.expect("input gradient");
                add_assign(&mut g_in, &g);
            }
            _ => add_assign(&mut g_in, &g_sum),
        }
        Ok(g_in)
    }

    fn zero_grad(&mut self) {
        self.first.zero_grad();
        self.second.zero_grad();
        if let Some(p) = &mut self.projection {
            p.zero_grad();
        }
    }
}

fn add_assign(dst: &mut Activations, src: &Activations) {
    for (d, s) in dst.data.iter_mut().zip(&src.data) {
        *d += s;
    }
}

#[derive(Debug, Clone)]
struct BlockTape {
    input: Activations,
    r1: Activations,
    c1: BatchNormCache,
    c2: BatchNormCache,
    cp: Option<BatchNormCache>,
    out: Activations,
}

/// Intermediate values of a train-mode forward pass, consumed by
/// [`Network::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    input: Activations,
    stem_cache: BatchNormCache,
    stem_out: Activations,
    blocks: Vec<BlockTape>,
    last: Activations,
    pooled: Vec<f64>,
    pub logits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub variant: ArchitectureVariant,
    /// Per-sample input shape `(C, H, W)`.
    pub input_shape: [usize; 3],
    pub stem: ConvBn,
    pub blocks: Vec<Block>,
    pub head: Dense,
    pub seed: u64,
}

/// Convolution kernel of the residual blocks for a layout.
pub fn block_kernel(dims: Dimensionality) -> (usize, usize) {
    match dims {
        Dimensionality::OneD => (1, 3),
        Dimensionality::TwoD => (3, 3),
    }
}

/// Builds and initializes a network for inputs of shape `(C, H, W)`.
pub fn build_network(
    variant: &ArchitectureVariant,
    input_shape: [usize; 3],
    seed: u64,
) -> Result<Network> {
    variant.validate()?;
    if input_shape.contains(&0) {
        return Err(Error::ShapeMismatch(format!("empty input shape {input_shape:?}")));
    }
    if variant.dimensionality == Dimensionality::OneD && input_shape[1] != 1 {
        return Err(Error::ShapeMismatch(format!(
            "1D network needs inputs of shape (C, 1, W), got {input_shape:?}"
        )));
    }
    let kernel = block_kernel(variant.dimensionality);
    let plan = variant.channel_plan();
    let mut stem = ConvBn::new(input_shape[0], variant.initial_filters, kernel);
    let mut blocks = Vec::with_capacity(plan.len());
    let mut cin = variant.initial_filters;
    for &cout in &plan {
        blocks.push(Block::new(cin, cout, kernel));
        cin = cout;
    }
    let mut head = Dense::new(cin);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    stem.conv.init(&mut rng);
    for b in &mut blocks {
        b.first.conv.init(&mut rng);
        b.second.conv.init(&mut rng);
        if let Some(p) = &mut b.projection {
            p.conv.init(&mut rng);
        }
    }
    head.init(&mut rng);
    Ok(Network {
        variant: variant.clone(),
        input_shape,
        stem,
        blocks,
        head,
        seed,
    })
}

impl Network {
    /// Output channels of every block.
    pub fn channel_plan(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::out_channels).collect()
    }

    /// Weights, biases and batch-norm affine parameters.
    pub fn param_count(&self) -> usize {
        self.stem.param_count()
            + self.blocks.iter().map(Block::param_count).sum::<usize>()
            + self.head.param_count()
    }

    /// Operations of one forward pass for a single sample of the given
    /// shape; only the spatial size matters.
    pub fn flop_count(&self, input_shape: [usize; 3]) -> u64 {
        let hw = input_shape[1] * input_shape[2];
        let last = self.head.inputs;
        self.stem.flops(hw)
            + 2 * (self.variant.initial_filters * hw) as u64
            + self.blocks.iter().map(|b| b.flops(hw)).sum::<u64>()
            + (last * hw) as u64
            + 2 * last as u64
    }

    fn check_input(&self, x: &Activations) -> Result<()> {
        let [c, h, w] = self.input_shape;
        if (x.channels, x.height, x.width) != (c, h, w) {
            return Err(Error::ShapeMismatch(format!(
                "network expects samples of shape ({c}, {h}, {w}), got ({}, {}, {})",
                x.channels, x.height, x.width
            )));
        }
        if x.batch == 0 {
            return Err(Error::EmptyInput("batch"));
        }
        Ok(())
    }

    /// Logits with batch-norm running statistics. Read-only.
    pub fn forward_infer(&self, x: &Activations) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut h = relu(&self.stem.forward_infer(x)?);
        for b in &self.blocks {
            h = b.forward_infer(&h)?;
        }
        let logits = self.head.forward(&global_average_pool(&h));
        finite(logits)
    }

    /// Logits with batch statistics; updates running statistics and records
    /// what [`backward`](Self::backward) needs.
    pub fn forward_train(&mut self, x: &Activations) -> Result<Tape> {
        self.check_input(x)?;
        let (s, stem_cache) = self.stem.forward_train(x)?;
        let stem_out = relu(&s);
        let mut h = stem_out.clone();
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &mut self.blocks {
            let (out, tape) = b.forward_train(h)?;
            blocks.push(tape);
            h = out;
        }
        let pooled = global_average_pool(&h);
        let logits = finite(self.head.forward(&pooled))?;
        Ok(Tape {
            input: x.clone(),
            stem_cache,
            stem_out,
            blocks,
            last: h,
            pooled,
            logits,
        })
    }

    /// Logits in either mode; train mode updates running statistics.
    pub fn forward(&mut self, x: &Activations, mode: Mode) -> Result<Vec<f64>> {
        match mode {
            Mode::Infer => self.forward_infer(x),
            Mode::Train => Ok(self.forward_train(x)?.logits),
        }
    }

    /// Accumulates parameter gradients given `dL/dlogit` per sample.
    pub fn backward(&mut self, tape: &Tape, grad_logits: &[f64]) -> Result<()> {
        if grad_logits.len() != tape.logits.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} logit gradients for a batch of {}",
                grad_logits.len(),
                tape.logits.len()
            )));
        }
        let g_pooled = self.head.backward(&tape.pooled, grad_logits);
        let mut g = global_average_pool_backward(&g_pooled, &tape.last);
        for (b, t) in self.blocks.iter_mut().zip(&tape.blocks).rev() {
            g = b.backward(t, &g)?;
        }
        let g = relu_backward(&tape.stem_out, &g);
        self.stem.backward(&tape.input, &tape.stem_cache, &g, false)?;
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        self.stem.zero_grad();
        self.blocks.iter_mut().for_each(Block::zero_grad);
        self.head.zero_grad();
    }

    /// Trainable parameters with their gradient buffers, in a fixed order.
    pub fn params_mut(&mut self) -> Vec<ParamRef<'_>> {
        let mut out = Vec::new();
        push_conv_bn_params(&mut out, "stem", &mut self.stem);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            push_conv_bn_params(&mut out, &format!("block{i}.first"), &mut b.first);
            push_conv_bn_params(&mut out, &format!("block{i}.second"), &mut b.second);
            if let Some(p) = &mut b.projection {
                push_conv_bn_params(&mut out, &format!("block{i}.projection"), p);
            }
        }
        out.push(ParamRef {
            name: "head.weight".into(),
            value: &mut self.head.weight,
            grad: &mut self.head.grad_weight,
        });
        out.push(ParamRef {
            name: "head.bias".into(),
            value: std::slice::from_mut(&mut self.head.bias),
            grad: std::slice::from_mut(&mut self.head.grad_bias),
        });
        out
    }

    /// Every stored tensor (parameters and running statistics) in
    /// serialization order: per convolution weight then bias, per batch norm
    /// gamma, beta, running mean, running variance, then the head weight
    /// and bias.
    pub fn state(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        state_conv_bn(&mut out, "stem", &self.stem);
        for (i, b) in self.blocks.iter().enumerate() {
            state_conv_bn(&mut out, &format!("block{i}.first"), &b.first);
            state_conv_bn(&mut out, &format!("block{i}.second"), &b.second);
            if let Some(p) = &b.projection {
                state_conv_bn(&mut out, &format!("block{i}.projection"), p);
            }
        }
        out.push(("head.weight".into(), &self.head.weight));
        out.push(("head.bias".into(), std::slice::from_ref(&self.head.bias)));
        out
    }

    /// Mutable counterpart of [`state`](Self::state), same order.
    pub fn state_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        state_conv_bn_mut(&mut out, "stem", &mut self.stem);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            state_conv_bn_mut(&mut out, &format!("block{i}.first"), &mut b.first);
            state_conv_bn_mut(&mut out, &format!("block{i}.second"), &mut b.second);
            if let Some(p) = &mut b.projection {
                state_conv_bn_mut(&mut out, &format!("block{i}.projection"), p);
            }
        }
        out.push(("head.weight".into(), &mut self.head.weight));
        out.push(("head.bias".into(), std::slice::from_mut(&mut self.head.bias)));
        out
    }

    /// Total number of stored values, `state()` flattened.
    pub fn state_len(&self) -> usize {
        self.state().iter().map(|(_, v)| v.len()).sum()
    }
}

/// One trainable tensor and its gradient.
pub struct ParamRef<'a> {
    pub name: String,
    pub value: &'a mut [f64],
    pub grad: &'a mut [f64],
}

fn push_conv_bn_params<'a>(out: &mut Vec<ParamRef<'a>>, prefix: &str, cb: &'a mut ConvBn) {
    let ConvBn { conv, bn } = cb;
    out.push(ParamRef {
        name: format!("{prefix}.conv.weight"),
        value: &mut conv.weight,
        grad: &mut conv.grad_weight,
    });
    out.push(ParamRef {
        name: format!("{prefix}.conv.bias"),
        value: &mut conv.bias,
        grad: &mut conv.grad_bias,
    });
    out.push(ParamRef {
        name: format!("{prefix}.bn.gamma"),
        value: &mut bn.gamma,
        grad: &mut bn.grad_gamma,
    });
    out.push(ParamRef {
        name: format!("{prefix}.bn.beta"),
        value: &mut bn.beta,
        grad: &mut bn.grad_beta,
    });
}

fn state_conv_bn<'a>(out: &mut Vec<(String, &'a [f64])>, prefix: &str, cb: &'a ConvBn) {
    out.push((format!("{prefix}.conv.weight"), &cb.conv.weight));
    out.push((format!("{prefix}.conv.bias"), &cb.conv.bias));
    out.push((format!("{prefix}.bn.gamma"), &cb.bn.gamma));
    out.push((format!("{prefix}.bn.beta"), &cb.bn.beta));
    out.push((format!("{prefix}.bn.running_mean"), &cb.bn.running_mean));
    out.push((format!("{prefix}.bn.running_var"), &cb.bn.running_var));
}

fn state_conv_bn_mut<'a>(out: &mut Vec<(String, &'a mut [f64])>, prefix: &str, cb: &'a mut ConvBn) {
    let ConvBn { conv, bn } = cb;
    out.push((format!("{prefix}.conv.weight"), &mut conv.weight));
    out.push((format!("{prefix}.conv.bias"), &mut conv.bias));
    out.push((format!("{prefix}.bn.gamma"), &mut bn.gamma));
    out.push((format!("{prefix}.bn.beta"), &mut bn.beta));
    out.push((format!("{prefix}.bn.running_mean"), &mut bn.running_mean));
    out.push((format!("{prefix}.bn.running_var"), &mut bn.running_var));
}

fn finite(logits: Vec<f64>) -> Result<Vec<f64>> {
    if logits.iter().all(|v| v.is_finite()) {
        Ok(logits)
    } else {
        Err(Error::NonFinite("network output".into()))
    }
}
