//! Deterministic forward-pass engine for AlphaZero-shaped residual networks:
//! per-layer activation capture, checkpoint file I/O, and planted-weight
//! checkpoint constructors for testing.
//!
//! Layer semantics: z1 = clip(relu(conv_in(x))), and for l >= 2
//! z^l = clip(relu(z^{l-1} + g^l(z^{l-1}))) with g^l = conv . relu . conv,
//! each conv followed by a fused per-channel scale/bias (batch norm folded at
//! checkpoint creation). Activations are captured where the skip connections
//! meet. All spatial tensors are plane-major `[channel][row][col]`.

mod io;
mod plant;

use encoding::{InputTensor, GLOBAL_PLANES, PLANES_PER_PLY, POLICY_PLANES};
use thiserror::Error;

pub use io::{checkpoint_file_size, load_checkpoint, save_checkpoint};
pub use plant::{plant_linear_feature, plant_policy_move, plant_value_sum, zero_checkpoint};

/// Hidden width of the value head's dense layer, independent of `channels`.
pub const VALUE_HIDDEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub blocks: usize,
    pub channels: usize,
    pub h: usize,
    pub clip_max: f32,
}

impl Default for NetworkConfig {
    /// Desk-scale defaults (production nets run blocks=20, channels=256, h=8).
    fn default() -> Self {
        NetworkConfig {
            blocks: 4,
            channels: 32,
            h: 1,
            clip_max: 15.0,
        }
    }
}

impl NetworkConfig {
    pub fn input_planes(&self) -> usize {
        PLANES_PER_PLY * self.h + GLOBAL_PLANES
    }
}

/// 3x3 (or 1x1) convolution with fused per-channel scale and bias:
/// `y_o = scale_o * sum(w_o * x) + bias_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    /// `[out][in][ky][kx]`, row-major.
    pub weight: Vec<f32>,
    pub scale: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvLayer {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize) -> ConvLayer {
        ConvLayer {
            in_channels,
            out_channels,
            kernel,
            weight: vec![0.0; out_channels * in_channels * kernel * kernel],
            scale: vec![1.0; out_channels],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn weight_mut(&mut self, out: usize, inp: usize, ky: usize, kx: usize) -> &mut f32 {
        let k = self.kernel;
        &mut self.weight[((out * self.in_channels + inp) * k + ky) * k + kx]
    }

    /// Zero-padded stride-1 convolution; `x` and the result are plane-major.
    fn apply(&self, x: &[f32], out: &mut [f32]) {
        let k = self.kernel as isize;
        let half = (self.kernel / 2) as isize;
        for o in 0..self.out_channels {
            let (scale, bias) = (self.scale[o], self.bias[o]);
            for row in 0..8isize {
                for col in 0..8isize {
                    let mut acc = 0.0f32;
                    for i in 0..self.in_channels {
                        let wbase = ((o * self.in_channels + i) * self.kernel) * self.kernel;
                        for ky in 0..k {
                            let r = row + ky - half;
                            if !(0..8).contains(&r) {
                                continue;
                            }
                            for kx in 0..k {
                                let c = col + kx - half;
                                if !(0..8).contains(&c) {
                                    continue;
                                }
                                acc += self.weight[wbase + (ky * k + kx) as usize]
                                    * x[(i * 8 + r as usize) * 8 + c as usize];
                            }
                        }
                    }
                    out[(o * 8 + row as usize) * 8 + col as usize] = scale * acc + bias;
                }
            }
        }
    }
}

/// Residual body function g^l: conv -> relu -> conv, scale/bias after each.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlock {
    pub conv1: ConvLayer,
    pub conv2: ConvLayer,
}

/// Dense layer `y = W x + b` with `weight[out][in]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

impl DenseLayer {
    pub fn zeros(in_features: usize, out_features: usize) -> DenseLayer {
        DenseLayer {
            in_features,
            out_features,
            weight: vec![0.0; out_features * in_features],
            bias: vec![0.0; out_features],
        }
    }

    fn apply(&self, x: &[f32]) -> Vec<f32> {
        (0..self.out_features)
            .map(|o| {
                let row = &self.weight[o * self.in_features..(o + 1) * self.in_features];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f32>() + self.bias[o]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: NetworkConfig,
    pub step: u64,
    pub conv_in: ConvLayer,
    /// `blocks - 1` residual bodies, producing z^2 .. z^L.
    pub residual: Vec<ResidualBlock>,
    /// 1x1 conv mapping channels to the 73 policy planes.
    pub policy_conv: ConvLayer,
    /// 1x1 conv mapping channels to a single linear plane.
    pub value_conv: ConvLayer,
    pub value_dense1: DenseLayer,
    pub value_dense2: DenseLayer,
}

/// Captured activations z^1 .. z^L, each `channels` planes of 8x8.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSet {
    pub channels: usize,
    layers: Vec<Vec<f32>>,
}

impl ActivationSet {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Plane-major data of layer `l` (1-based, matching z^l).
    pub fn layer(&self, l: usize) -> &[f32] {
        &self.layers[l - 1]
    }

    pub fn get(&self, l: usize, row: usize, col: usize, channel: usize) -> f32 {
        self.layers[l - 1][(channel * 8 + row) * 8 + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOutput {
    /// 8x8x73 policy logits, plane-major `[plane][row][col]`.
    pub policy: Vec<f32>,
    pub value: f32,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("input has {got} planes, checkpoint expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("bad magic, not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("truncated checkpoint file")]
    Truncated,
    #[error("inconsistent checkpoint: {0}")]
    Inconsistent(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn relu_clip(x: &mut [f32], clip_max: f32) {
    for v in x {
        *v = v.max(0.0).min(clip_max);
    }
}

/// Runs the network, returning heads output and all captured activations.
/// Pure and deterministic: identical inputs give bit-identical outputs.
pub fn forward(
    ck: &Checkpoint,
    x: &InputTensor,
) -> Result<(NetworkOutput, ActivationSet), NetworkError> {
    let planes = ck.config.input_planes();
    if x.num_planes() != planes {
        return Err(NetworkError::ShapeMismatch {
            expected: planes,
            got: x.num_planes(),
        });
    }
    let c = ck.config.channels;
    let clip = ck.config.clip_max;
    let mut layers = Vec::with_capacity(ck.config.blocks);

    let mut z = vec![0.0f32; c * 64];
    ck.conv_in.apply(x.as_slice(), &mut z);
    relu_clip(&mut z, clip);
    layers.push(z.clone());

    let mut t1 = vec![0.0f32; c * 64];
    let mut t2 = vec![0.0f32; c * 64];
    for block in &ck.residual {
        block.conv1.apply(&z, &mut t1);
        relu_clip(&mut t1, f32::INFINITY);
        block.conv2.apply(&t1, &mut t2);
        for (zi, gi) in z.iter_mut().zip(&t2) {
            *zi += gi;
        }
        relu_clip(&mut z, clip);
        layers.push(z.clone());
    }

    let mut policy = vec![0.0f32; POLICY_PLANES * 64];
    ck.policy_conv.apply(&z, &mut policy);

    let mut value_plane = vec![0.0f32; 64];
    ck.value_conv.apply(&z, &mut value_plane);
    let mut hidden = ck.value_dense1.apply(&value_plane);
    relu_clip(&mut hidden, f32::INFINITY);
    let value = ck.value_dense2.apply(&hidden)[0].tanh();

    Ok((
        NetworkOutput { policy, value },
        ActivationSet {
            channels: c,
            layers,
        },
    ))
}

/// Weights i.i.d. normal(0, scale^2 / fan_in); scales 1, biases 0.
pub fn random_checkpoint(config: NetworkConfig, seed: u64, scale: f32) -> Checkpoint {
    let mut rng = chesscore::sampling::SplitRng::new(seed ^ 0x9E37_79B9_0000_0001);
    let mut gauss = move || {
        // Box-Muller on the split RNG.
        let u1 = ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).max(f64::MIN_POSITIVE);
        let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        ((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()) as f32
    };
    let mut ck = zero_checkpoint(config);
    let fill_conv = |layer: &mut ConvLayer, gauss: &mut dyn FnMut() -> f32| {
        let fan_in = (layer.in_channels * layer.kernel * layer.kernel) as f32;
        let sd = scale / fan_in.sqrt();
        for w in &mut layer.weight {
            *w = gauss() * sd;
        }
    };
    fill_conv(&mut ck.conv_in, &mut gauss);
    for block in &mut ck.residual {
        fill_conv(&mut block.conv1, &mut gauss);
        fill_conv(&mut block.conv2, &mut gauss);
    }
    fill_conv(&mut ck.policy_conv, &mut gauss);
    fill_conv(&mut ck.value_conv, &mut gauss);
    for dense in [&mut ck.value_dense1, &mut ck.value_dense2] {
        let sd = scale / (dense.in_features as f32).sqrt();
        for w in &mut dense.weight {
            *w = gauss() * sd;
        }
    }
    ck
}
