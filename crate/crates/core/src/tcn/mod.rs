//! A desk-scale sequence-to-sequence temporal convolution network.
//!
//! The network maps a 2D joint sequence (`2J` channels over `T` frames) to a
//! 3D one (`3J` channels over the same `T` frames) through a stack of dilated
//! 1D convolutions with edge-replication padding, ReLU activations, and
//! optional residual connections on equal-width layers. Gradients are
//! hand-rolled reverse mode; training uses Adam. All arithmetic is f64.

mod adam;
pub mod checkpoint;
mod conv;

pub use adam::AdamParams;
pub use checkpoint::{load_checkpoint, save_checkpoint};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{combined_loss, LossConfig, LossMode};
use crate::motion::{MotionSequence, MotionSequence2D};

/// One dilated convolution layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayerSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    /// Must be odd so same-padding is symmetric.
    pub kernel_size: usize,
    pub dilation: usize,
    pub has_activation: bool,
}

impl ConvLayerSpec {
    fn weight_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_size
    }
}

/// Full network shape: an ordered layer stack plus per-layer residual flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<ConvLayerSpec>,
    /// `residual[i]` adds the layer input to its (activated) output;
    /// requires equal in/out channel counts.
    pub residual: Vec<bool>,
}

impl NetworkSpec {
    /// The default desk-scale network for `joints` joints: four kernel-3
    /// layers with dilations 1, 2, 4, 1, hidden width 32, ReLU everywhere
    /// except the output, and residual connections on the equal-width
    /// middle layers.
    pub fn desk_default(joints: usize) -> Self {
        let hidden = 32;
        let layer = |cin, cout, dilation, act| ConvLayerSpec {
            in_channels: cin,
            out_channels: cout,
            kernel_size: 3,
            dilation,
            has_activation: act,
        };
        NetworkSpec {
            layers: vec![
                layer(2 * joints, hidden, 1, true),
                layer(hidden, hidden, 2, true),
                layer(hidden, hidden, 4, true),
                layer(hidden, 3 * joints, 1, false),
            ],
            residual: vec![false, true, true, false],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidNetworkSpec("no layers".into()));
        }
        if self.residual.len() != self.layers.len() {
            return Err(Error::InvalidNetworkSpec(format!(
                "{} residual flags for {} layers",
                self.residual.len(),
                self.layers.len()
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.in_channels == 0 || layer.out_channels == 0 {
                return Err(Error::InvalidNetworkSpec(format!(
                    "layer {i} has a zero channel count"
                )));
            }
            if layer.kernel_size % 2 == 0 {
                return Err(Error::InvalidNetworkSpec(format!(
                    "layer {i} kernel size {} is not odd",
                    layer.kernel_size
                )));
            }
            if layer.dilation == 0 {
                return Err(Error::InvalidNetworkSpec(format!(
                    "layer {i} has dilation 0"
                )));
            }
            if i + 1 < self.layers.len() && layer.out_channels != self.layers[i + 1].in_channels {
                return Err(Error::InvalidNetworkSpec(format!(
                    "layer {i} outputs {} channels but layer {} expects {}",
                    layer.out_channels,
                    i + 1,
                    self.layers[i + 1].in_channels
                )));
            }
            if self.residual[i] && layer.in_channels != layer.out_channels {
                return Err(Error::InvalidNetworkSpec(format!(
                    "layer {i} is residual but maps {} -> {} channels",
                    layer.in_channels, layer.out_channels
                )));
            }
        }
        if self.layers.last().unwrap().has_activation {
            return Err(Error::InvalidNetworkSpec(
                "last layer must not have an activation".into(),
            ));
        }
        Ok(())
    }

    pub fn in_channels(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_channels)
    }

    pub fn out_channels(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_channels)
    }

    /// Half-width of the receptive field: how far (in frames) an input
    /// perturbation can propagate into the output.
    pub fn receptive_radius(&self) -> usize {
        self.layers
            .iter()
            .map(|l| (l.kernel_size - 1) / 2 * l.dilation)
            .sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight_count() + l.out_channels)
            .sum()
    }
}

/// Network parameters plus optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    spec: NetworkSpec,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    moment1_w: Vec<Vec<f64>>,
    moment2_w: Vec<Vec<f64>>,
    moment1_b: Vec<Vec<f64>>,
    moment2_b: Vec<Vec<f64>>,
    step: u64,
    seed: u64,
    /// Bumped on every parameter mutation; guards cached activations.
    version: u64,
}

impl NetworkState {
    /// Seeded initialization: weights uniform in `+-1/sqrt(fan_in)` with
    /// `fan_in = in_channels * kernel_size`, biases zero.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(spec.layers.len());
        let mut biases = Vec::with_capacity(spec.layers.len());
        for layer in &spec.layers {
            let bound = 1.0 / ((layer.in_channels * layer.kernel_size) as f64).sqrt();
            weights.push(
                (0..layer.weight_count())
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; layer.out_channels]);
        }
        Ok(Self::from_parameters(spec, weights, biases, 0, seed))
    }

    pub(crate) fn from_parameters(
        spec: NetworkSpec,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        step: u64,
        seed: u64,
    ) -> Self {
        let moment1_w = weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let moment2_w = weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let moment1_b = biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let moment2_b = biases.iter().map(|b| vec![0.0; b.len()]).collect();
        Self {
            spec,
            weights,
            biases,
            moment1_w,
            moment2_w,
            moment1_b,
            moment2_b,
            step,
            seed,
            version: 0,
        }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count()
    }

    /// Flat parameter vector: per layer, weights row-major then bias. This
    /// is also the checkpoint blob order.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn get_param(&self, index: usize) -> f64 {
        let (layer, offset) = self.locate(index);
        let w_len = self.weights[layer].len();
        if offset < w_len {
            self.weights[layer][offset]
        } else {
            self.biases[layer][offset - w_len]
        }
    }

    /// Sets one parameter by flat index. Invalidates outstanding caches.
    pub fn set_param(&mut self, index: usize, value: f64) {
        let (layer, offset) = self.locate(index);
        let w_len = self.weights[layer].len();
        if offset < w_len {
            self.weights[layer][offset] = value;
        } else {
            self.biases[layer][offset - w_len] = value;
        }
        self.version += 1;
    }

    fn locate(&self, index: usize) -> (usize, usize) {
        let mut rest = index;
        for (layer, spec) in self.spec.layers.iter().enumerate() {
            let len = spec.weight_count() + spec.out_channels;
            if rest < len {
                return (layer, rest);
            }
            rest -= len;
        }
        panic!("parameter index {index} out of range");
    }

    fn apply_adam(&mut self, grads: &Gradients, cfg: &AdamParams) {
        self.step += 1;
        for layer in 0..self.weights.len() {
            adam::update(
                &mut self.weights[layer],
                &grads.weights[layer],
                &mut self.moment1_w[layer],
                &mut self.moment2_w[layer],
                self.step,
                cfg,
            );
            adam::update(
                &mut self.biases[layer],
                &grads.biases[layer],
                &mut self.moment1_b[layer],
                &mut self.moment2_b[layer],
                self.step,
                cfg,
            );
        }
        self.version += 1;
    }
}

/// Activations cached by [`forward_cached`] for the backward pass.
pub struct ForwardCache {
    version: u64,
    t_len: usize,
    joints: usize,
    /// Input to each layer, channel-major.
    layer_inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each layer.
    preactivations: Vec<Vec<f64>>,
}

/// Parameter and input gradients produced by [`backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Gradient with respect to the 2D input, flat `T x J x 2`.
    pub input: Vec<f64>,
}

impl Gradients {
    fn zeros_like(state: &NetworkState, input_len: usize) -> Self {
        Self {
            weights: state.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: state.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            input: vec![0.0; input_len],
        }
    }

    fn accumulate(&mut self, other: &Gradients) {
        for (acc, g) in self.weights.iter_mut().zip(&other.weights) {
            for (a, b) in acc.iter_mut().zip(g) {
                *a += b;
            }
        }
        for (acc, g) in self.biases.iter_mut().zip(&other.biases) {
            for (a, b) in acc.iter_mut().zip(g) {
                *a += b;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for v in w {
                *v *= factor;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= factor;
            }
        }
    }
}

/// `T x J x 2` joint layout to channel-major `[2J x T]`, channel `j*2 + axis`.
fn seq2d_to_channels(seq: &MotionSequence2D) -> Vec<f64> {
    let (t_len, joints) = (seq.frames(), seq.joints());
    let mut out = vec![0.0; 2 * joints * t_len];
    let p = seq.positions();
    for t in 0..t_len {
        for j in 0..joints {
            for c in 0..2 {
                out[(j * 2 + c) * t_len + t] = p[(t * joints + j) * 2 + c];
            }
        }
    }
    out
}

/// Channel-major `[3J x T]` (channel `j*3 + axis`) to flat `T x J x 3`.
fn channels_to_positions(ch: &[f64], joints: usize, t_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; t_len * joints * 3];
    for t in 0..t_len {
        for j in 0..joints {
            for c in 0..3 {
                out[(t * joints + j) * 3 + c] = ch[(j * 3 + c) * t_len + t];
            }
        }
    }
    out
}

fn positions_grad_to_channels(grad: &[f64], joints: usize, t_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; 3 * joints * t_len];
    for t in 0..t_len {
        for j in 0..joints {
            for c in 0..3 {
                out[(j * 3 + c) * t_len + t] = grad[(t * joints + j) * 3 + c];
            }
        }
    }
    out
}

fn channels_to_input_grad(ch: &[f64], joints: usize, t_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; t_len * joints * 2];
    for t in 0..t_len {
        for j in 0..joints {
            for c in 0..2 {
                out[(t * joints + j) * 2 + c] = ch[(j * 2 + c) * t_len + t];
            }
        }
    }
    out
}

fn run_layers(state: &NetworkState, input: &MotionSequence2D) -> Result<ForwardCache> {
    state.spec.validate()?;
    let joints = input.joints();
    if state.spec.in_channels() != 2 * joints {
        return Err(Error::ChannelMismatch {
            expected: state.spec.in_channels(),
            got: 2 * joints,
        });
    }
    if state.spec.out_channels() != 3 * joints {
        return Err(Error::ChannelMismatch {
            expected: state.spec.out_channels(),
            got: 3 * joints,
        });
    }
    let t_len = input.frames();
    let mut current = seq2d_to_channels(input);
    let mut layer_inputs = Vec::with_capacity(state.spec.layers.len());
    let mut preactivations = Vec::with_capacity(state.spec.layers.len());
    for (l, layer) in state.spec.layers.iter().enumerate() {
        let z = conv::forward(
            &current,
            layer.in_channels,
            t_len,
            &state.weights[l],
            &state.biases[l],
            layer.out_channels,
            layer.kernel_size,
            layer.dilation,
        );
        let mut y: Vec<f64> = if layer.has_activation {
            z.iter().map(|v| v.max(0.0)).collect()
        } else {
            z.clone()
        };
        if state.spec.residual[l] {
            for (o, x) in y.iter_mut().zip(&current) {
                *o += x;
            }
        }
        layer_inputs.push(std::mem::replace(&mut current, y));
        preactivations.push(z);
    }
    Ok(ForwardCache {
        version: state.version,
        t_len,
        joints,
        layer_inputs,
        preactivations,
    })
}

impl ForwardCache {
    /// Final network output in channel-major layout.
    fn output_channels(&self, state: &NetworkState) -> Vec<f64> {
        // The last layer's output is not stored as any layer input; rebuild
        // it from the cached pre-activation (the last layer never has an
        // activation but may be residual).
        let last = state.spec.layers.len() - 1;
        let mut out = self.preactivations[last].clone();
        if state.spec.residual[last] {
            for (o, x) in out.iter_mut().zip(&self.layer_inputs[last]) {
                *o += x;
            }
        }
        out
    }
}

/// Runs the network, producing a 3D sequence with the input's frame count,
/// skeleton, and frame rate.
pub fn forward(state: &NetworkState, input: &MotionSequence2D) -> Result<MotionSequence> {
    forward_cached(state, input).map(|(seq, _)| seq)
}

/// [`forward`] that also returns the activation cache for [`backward`].
pub fn forward_cached(
    state: &NetworkState,
    input: &MotionSequence2D,
) -> Result<(MotionSequence, ForwardCache)> {
    let cache = run_layers(state, input)?;
    let positions = channels_to_positions(&cache.output_channels(state), cache.joints, cache.t_len);
    let seq = MotionSequence::new(
        input.skeleton().clone(),
        input.fps(),
        cache.t_len,
        positions,
    )?;
    Ok((seq, cache))
}

/// Reverse-mode pass: propagates `loss_grad` (gradient of a scalar loss with
/// respect to the output positions, flat `T x J x 3`) back through the
/// cached forward pass.
pub fn backward(
    state: &NetworkState,
    cache: &ForwardCache,
    loss_grad: &[f64],
) -> Result<Gradients> {
    if cache.version != state.version {
        return Err(Error::StaleCache);
    }
    if loss_grad.len() != cache.t_len * cache.joints * 3 {
        return Err(Error::ShapeMismatch(format!(
            "loss gradient has {} entries, expected {}",
            loss_grad.len(),
            cache.t_len * cache.joints * 3
        )));
    }
    let t_len = cache.t_len;
    let mut grads = Gradients::zeros_like(state, t_len * cache.joints * 2);
    let mut upstream = positions_grad_to_channels(loss_grad, cache.joints, t_len);
    for (l, layer) in state.spec.layers.iter().enumerate().rev() {
        let mut dz = upstream.clone();
        if layer.has_activation {
            for (g, z) in dz.iter_mut().zip(&cache.preactivations[l]) {
                if *z <= 0.0 {
                    *g = 0.0;
                }
            }
        }
        let (dw, db, mut dx) = conv::backward(
            &cache.layer_inputs[l],
            layer.in_channels,
            t_len,
            &state.weights[l],
            layer.out_channels,
            layer.kernel_size,
            layer.dilation,
            &dz,
        );
        grads.weights[l] = dw;
        grads.biases[l] = db;
        if state.spec.residual[l] {
            for (x, u) in dx.iter_mut().zip(&upstream) {
                *x += u;
            }
        }
        upstream = dx;
    }
    grads.input = channels_to_input_grad(&upstream, cache.joints, t_len);
    Ok(grads)
}

/// Training configuration: optimizer hyperparameters plus the loss setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: AdamParams,
    pub loss: LossConfig,
}

/// One optimizer step over a batch. Returns the pre-step batch mean loss.
///
/// Gradients are accumulated in batch order and averaged; a non-finite
/// forward output or loss aborts before any parameter is touched.
pub fn train_step(
    state: &mut NetworkState,
    batch: &[(MotionSequence2D, MotionSequence)],
    mode: LossMode,
    config: &TrainConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty training batch".into()));
    }
    let t_len = batch[0].0.frames();
    for (input, target) in batch {
        if input.frames() != t_len {
            return Err(Error::ShapeMismatch(format!(
                "batch mixes sequence lengths {} and {}",
                t_len,
                input.frames()
            )));
        }
        if target.frames() != input.frames() || target.joints() != input.joints() {
            return Err(Error::ShapeMismatch(format!(
                "input is {}x{} but target is {}x{}",
                input.frames(),
                input.joints(),
                target.frames(),
                target.joints()
            )));
        }
    }

    let mut total = Gradients::zeros_like(state, t_len * batch[0].0.joints() * 2);
    let mut loss_sum = 0.0;
    for (input, target) in batch {
        // A non-finite forward output shows up as a failed sequence
        // invariant; report it as training divergence.
        let (estimate, cache) = forward_cached(state, input).map_err(|e| match e {
            Error::InvalidMotion { .. } => Error::NonFiniteLoss { step: state.step },
            other => other,
        })?;
        let loss = combined_loss(&estimate, target, &config.loss, mode)?;
        if !loss.value.is_finite() {
            return Err(Error::NonFiniteLoss { step: state.step });
        }
        loss_sum += loss.value;
        let grads = backward(state, &cache, &loss.grad)?;
        total.accumulate(&grads);
    }
    total.scale(1.0 / batch.len() as f64);
    state.apply_adam(&total, &config.optimizer);
    Ok(loss_sum / batch.len() as f64)
}
