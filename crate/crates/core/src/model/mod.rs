//! The performance-predictor decoder: a residual MLP from features to
//! per-algorithm scores, with hand-derived forward and backward passes.
//!
//! Architecture: `linear(d -> h1)` + ReLU, a stack of residual blocks at
//! width `h1`, `linear(h1 -> h2)` + ReLU, a second stack at width `h2`; the
//! two stack outputs are concatenated and projected by a final linear layer
//! to `m` raw scores. Each block is `linear -> ReLU -> linear` with an
//! identity skip. The plain-MLP variant drops the skips and keeps every
//! parameter shape identical.
//!
//! Parameters live in a single flat `Vec<f64>` addressed through a layout
//! map; gradients use the same layout, so the optimizer, checkpoints, and
//! finite-difference tests all operate on plain slices.

pub mod checkpoint;
pub mod optimizer;
pub mod train;

use std::ops::Range;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decoder wiring variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderVariant {
    /// Blocks carry an identity skip connection.
    Residual,
    /// Same shapes, skips removed.
    PlainMlp,
}

/// Everything needed to rebuild the decoder's shape deterministically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub variant: DecoderVariant,
    /// Widths of the two stacks.
    pub hidden_dims: (usize, usize),
    pub blocks_per_stack: usize,
    /// Seed for weight initialization.
    pub seed: u64,
}

impl ArchitectureSpec {
    /// Residual decoder with the canonical 256/128 triple-block stacks.
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            variant: DecoderVariant::Residual,
            hidden_dims: (256, 128),
            blocks_per_stack: 3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig(
                "input_dim and output_dim must be at least 1".into(),
            ));
        }
        if self.hidden_dims.0 == 0 || self.hidden_dims.1 == 0 {
            return Err(Error::InvalidConfig(
                "hidden dims must be at least 1".into(),
            ));
        }
        if self.blocks_per_stack == 0 {
            return Err(Error::InvalidConfig(
                "blocks_per_stack must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Flat-buffer coordinates of one linear layer.
#[derive(Debug, Clone, PartialEq, Eq)]
struct LinSpan {
    /// Row-major `out_dim x in_dim` weight matrix.
    w: Range<usize>,
    b: Range<usize>,
    in_dim: usize,
    out_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BlockSpan {
    l1: LinSpan,
    l2: LinSpan,
}

/// Parameter layout derived from an [`ArchitectureSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    input_proj: LinSpan,
    stack_a: Vec<BlockSpan>,
    bridge: LinSpan,
    stack_b: Vec<BlockSpan>,
    head: LinSpan,
    total: usize,
}

impl Layout {
    fn new(arch: &ArchitectureSpec) -> Self {
        let (h1, h2) = arch.hidden_dims;
        let mut cursor = 0usize;
        let mut lin = |in_dim: usize, out_dim: usize| {
            let w = cursor..cursor + in_dim * out_dim;
            cursor = w.end;
            let b = cursor..cursor + out_dim;
            cursor = b.end;
            LinSpan {
                w,
                b,
                in_dim,
                out_dim,
            }
        };
        let input_proj = lin(arch.input_dim, h1);
        let stack_a = (0..arch.blocks_per_stack)
            .map(|_| BlockSpan {
                l1: lin(h1, h1),
                l2: lin(h1, h1),
            })
            .collect();
        let bridge = lin(h1, h2);
        let stack_b = (0..arch.blocks_per_stack)
            .map(|_| BlockSpan {
                l1: lin(h2, h2),
                l2: lin(h2, h2),
            })
            .collect();
        let head = lin(h1 + h2, arch.output_dim);
        Layout {
            input_proj,
            stack_a,
            bridge,
            stack_b,
            head,
            total: cursor,
        }
    }
}

/// All decoder weights plus the architecture they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    arch: ArchitectureSpec,
    layout: Layout,
    flat: Vec<f64>,
}

impl DecoderParams {
    pub fn arch(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    /// Flat parameter vector in layout order (layer by layer, weights then
    /// biases).
    pub fn to_flat(&self) -> Vec<f64> {
        self.flat.clone()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    /// Rebuilds parameters from a flat vector laid out by [`Self::to_flat`].
    pub fn from_flat(arch: ArchitectureSpec, flat: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(&arch);
        if flat.len() != layout.total {
            return Err(Error::ShapeMismatch(format!(
                "flat parameter vector has length {}, architecture needs {}",
                flat.len(),
                layout.total
            )));
        }
        if !flat.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidInput(
                "decoder parameters must all be finite".into(),
            ));
        }
        Ok(Self { arch, layout, flat })
    }

    /// All-zero parameters; also the gradient accumulator shape.
    pub fn zeros(arch: &ArchitectureSpec) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(arch);
        Ok(Self {
            arch: arch.clone(),
            flat: vec![0.0; layout.total],
            layout,
        })
    }

    /// `(name, in_dim, out_dim)` for every linear layer, in layout order.
    pub fn layer_shapes(&self) -> Vec<(String, usize, usize)> {
        let mut shapes = Vec::new();
        let mut push = |name: String, s: &LinSpan| shapes.push((name, s.in_dim, s.out_dim));
        push("input_proj".into(), &self.layout.input_proj);
        for (t, b) in self.layout.stack_a.iter().enumerate() {
            push(format!("stack_a.{t}.l1"), &b.l1);
            push(format!("stack_a.{t}.l2"), &b.l2);
        }
        push("bridge".into(), &self.layout.bridge);
        for (t, b) in self.layout.stack_b.iter().enumerate() {
            push(format!("stack_b.{t}.l1"), &b.l1);
            push(format!("stack_b.{t}.l2"), &b.l2);
        }
        push("head".into(), &self.layout.head);
        shapes
    }
}

/// Deterministic fan-in-scaled uniform initialization; biases start at zero.
pub fn init_decoder(spec: &ArchitectureSpec) -> Result<DecoderParams> {
    spec.validate()?;
    let mut params = DecoderParams::zeros(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let spans = collect_spans(&params.layout);
    for span in spans {
        let bound = 1.0 / (span.in_dim as f64).sqrt();
        for w in &mut params.flat[span.w.clone()] {
            *w = rng.random_range(-bound..bound);
        }
        // biases stay zero
    }
    Ok(params)
}

fn collect_spans(layout: &Layout) -> Vec<LinSpan> {
    let mut spans = vec![layout.input_proj.clone()];
    for b in &layout.stack_a {
        spans.push(b.l1.clone());
        spans.push(b.l2.clone());
    }
    spans.push(layout.bridge.clone());
    for b in &layout.stack_b {
        spans.push(b.l1.clone());
        spans.push(b.l2.clone());
    }
    spans.push(layout.head.clone());
    spans
}

fn lin_forward(flat: &[f64], span: &LinSpan, x: &[f64]) -> Vec<f64> {
    let w = &flat[span.w.clone()];
    let b = &flat[span.b.clone()];
    let mut y = Vec::with_capacity(span.out_dim);
    for o in 0..span.out_dim {
        let row = &w[o * span.in_dim..(o + 1) * span.in_dim];
        let mut acc = b[o];
        for (wi, xi) in row.iter().zip(x) {
            acc += wi * xi;
        }
        y.push(acc);
    }
    y
}

/// Accumulates parameter gradients into `dflat` and, when `dx` is given,
/// adds the input gradient into it.
fn lin_backward(
    flat: &[f64],
    span: &LinSpan,
    x: &[f64],
    dy: &[f64],
    dflat: &mut [f64],
    dx: Option<&mut [f64]>,
) {
    let w = &flat[span.w.clone()];
    {
        let dw = &mut dflat[span.w.clone()];
        for o in 0..span.out_dim {
            let row = &mut dw[o * span.in_dim..(o + 1) * span.in_dim];
            let g = dy[o];
            for (di, xi) in row.iter_mut().zip(x) {
                *di += g * xi;
            }
        }
    }
    {
        let db = &mut dflat[span.b.clone()];
        for (di, g) in db.iter_mut().zip(dy) {
            *di += g;
        }
    }
    if let Some(dx) = dx {
        for o in 0..span.out_dim {
            let row = &w[o * span.in_dim..(o + 1) * span.in_dim];
            let g = dy[o];
            for (dxi, wi) in dx.iter_mut().zip(row) {
                *dxi += g * wi;
            }
        }
    }
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&z| z.max(0.0)).collect()
}

#[derive(Debug, Clone)]
struct BlockCache {
    input: Vec<f64>,
    /// Post-ReLU hidden activation of the block's transform path.
    hidden: Vec<f64>,
}

/// Intermediate activations of one forward pass, consumed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    x: Vec<f64>,
    a0: Vec<f64>,
    blocks_a: Vec<BlockCache>,
    a_out: Vec<f64>,
    b0: Vec<f64>,
    blocks_b: Vec<BlockCache>,
    concat: Vec<f64>,
}

fn block_forward(
    flat: &[f64],
    span: &BlockSpan,
    variant: DecoderVariant,
    input: Vec<f64>,
) -> (Vec<f64>, BlockCache) {
    let hidden = relu(&lin_forward(flat, &span.l1, &input));
    let transform = lin_forward(flat, &span.l2, &hidden);
    let output = match variant {
        DecoderVariant::Residual => input.iter().zip(&transform).map(|(i, t)| i + t).collect(),
        DecoderVariant::PlainMlp => transform,
    };
    (output, BlockCache { input, hidden })
}

fn stack_forward(
    flat: &[f64],
    spans: &[BlockSpan],
    variant: DecoderVariant,
    input: Vec<f64>,
) -> (Vec<f64>, Vec<BlockCache>) {
    let mut caches = Vec::with_capacity(spans.len());
    let mut current = input;
    for span in spans {
        let (next, cache) = block_forward(flat, span, variant, current);
        caches.push(cache);
        current = next;
    }
    (current, caches)
}

/// Raw (unsquashed) per-algorithm scores plus the activation cache needed by
/// [`backward`].
pub fn forward(params: &DecoderParams, features: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if features.len() != params.arch.input_dim {
        return Err(Error::ShapeMismatch(format!(
            "feature vector has length {}, decoder expects {}",
            features.len(),
            params.arch.input_dim
        )));
    }
    if !features.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(
            "feature vector contains a non-finite value".into(),
        ));
    }
    let flat = &params.flat;
    let layout = &params.layout;
    let variant = params.arch.variant;

    let a0 = relu(&lin_forward(flat, &layout.input_proj, features));
    let (a_out, blocks_a) = stack_forward(flat, &layout.stack_a, variant, a0.clone());
    let b0 = relu(&lin_forward(flat, &layout.bridge, &a_out));
    let (b_out, blocks_b) = stack_forward(flat, &layout.stack_b, variant, b0.clone());

    let mut concat = Vec::with_capacity(a_out.len() + b_out.len());
    concat.extend_from_slice(&a_out);
    concat.extend_from_slice(&b_out);
    let scores = lin_forward(flat, &layout.head, &concat);

    Ok((
        scores,
        ForwardCache {
            x: features.to_vec(),
            a0,
            blocks_a,
            a_out,
            b0,
            blocks_b,
            concat,
        },
    ))
}

/// Scores only, for inference paths that never backpropagate.
pub fn predict(params: &DecoderParams, features: &[f64]) -> Result<Vec<f64>> {
    forward(params, features).map(|(scores, _)| scores)
}

/// Row-per-instance batched prediction.
pub fn predict_batch(params: &DecoderParams, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    rows.iter().map(|row| predict(params, row)).collect()
}

fn stack_backward(
    flat: &[f64],
    spans: &[BlockSpan],
    variant: DecoderVariant,
    caches: &[BlockCache],
    d_output: Vec<f64>,
    dflat: &mut [f64],
) -> Vec<f64> {
    let mut d_out = d_output;
    for (span, cache) in spans.iter().zip(caches).rev() {
        // Transform path: input -> l1 -> relu -> l2.
        let mut d_hidden = vec![0.0; cache.hidden.len()];
        lin_backward(
            flat,
            &span.l2,
            &cache.hidden,
            &d_out,
            dflat,
            Some(&mut d_hidden),
        );
        for (dh, h) in d_hidden.iter_mut().zip(&cache.hidden) {
            if *h <= 0.0 {
                *dh = 0.0;
            }
        }
        let mut d_input = vec![0.0; cache.input.len()];
        lin_backward(
            flat,
            &span.l1,
            &cache.input,
            &d_hidden,
            dflat,
            Some(&mut d_input),
        );
        if variant == DecoderVariant::Residual {
            for (di, g) in d_input.iter_mut().zip(&d_out) {
                *di += g;
            }
        }
        d_out = d_input;
    }
    d_out
}

/// Accumulates `d loss / d params` into `acc` (layout order) given the
/// gradient of the loss with respect to the raw scores.
pub fn backward_into(
    params: &DecoderParams,
    cache: &ForwardCache,
    grad_scores: &[f64],
    acc: &mut [f64],
) -> Result<()> {
    let layout = &params.layout;
    let arch = &params.arch;
    if grad_scores.len() != arch.output_dim {
        return Err(Error::ShapeMismatch(format!(
            "score gradient has length {}, decoder outputs {}",
            grad_scores.len(),
            arch.output_dim
        )));
    }
    if acc.len() != layout.total {
        return Err(Error::ShapeMismatch(format!(
            "gradient accumulator has length {}, layout needs {}",
            acc.len(),
            layout.total
        )));
    }
    let (h1, h2) = arch.hidden_dims;
    if cache.x.len() != arch.input_dim
        || cache.a_out.len() != h1
        || cache.concat.len() != h1 + h2
        || cache.blocks_a.len() != layout.stack_a.len()
        || cache.blocks_b.len() != layout.stack_b.len()
    {
        return Err(Error::Internal(
            "forward cache does not match decoder architecture".into(),
        ));
    }
    let flat = &params.flat;
    let variant = arch.variant;

    let mut d_concat = vec![0.0; h1 + h2];
    lin_backward(
        flat,
        &layout.head,
        &cache.concat,
        grad_scores,
        acc,
        Some(&mut d_concat),
    );
    let d_a_cat = d_concat[..h1].to_vec();
    let d_b_out = d_concat[h1..].to_vec();

    let d_b0 = stack_backward(
        flat,
        &layout.stack_b,
        variant,
        &cache.blocks_b,
        d_b_out,
        acc,
    );
    let mut d_z_bridge = d_b0;
    for (dz, b) in d_z_bridge.iter_mut().zip(&cache.b0) {
        if *b <= 0.0 {
            *dz = 0.0;
        }
    }
    // Stack A feeds both the bridge and the concatenation.
    let mut d_a_out = d_a_cat;
    lin_backward(
        flat,
        &layout.bridge,
        &cache.a_out,
        &d_z_bridge,
        acc,
        Some(&mut d_a_out),
    );

    let d_a0 = stack_backward(
        flat,
        &layout.stack_a,
        variant,
        &cache.blocks_a,
        d_a_out,
        acc,
    );
    let mut d_z_in = d_a0;
    for (dz, a) in d_z_in.iter_mut().zip(&cache.a0) {
        if *a <= 0.0 {
            *dz = 0.0;
        }
    }
    lin_backward(flat, &layout.input_proj, &cache.x, &d_z_in, acc, None);
    Ok(())
}

/// Gradient of the loss with respect to every parameter, in layout order.
pub fn backward(
    params: &DecoderParams,
    cache: &ForwardCache,
    grad_scores: &[f64],
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; params.layout.total];
    backward_into(params, cache, grad_scores, &mut acc)?;
    Ok(acc)
}

/// Index of the maximum score; ties resolve to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Argmax algorithm selection over predicted scores.
pub fn select(params: &DecoderParams, features: &[f64]) -> Result<usize> {
    let scores = predict(params, features)?;
    Ok(argmax(&scores))
}
