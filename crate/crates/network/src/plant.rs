//! Planted-weight checkpoint constructors: ground-truth features for probe
//! and regression tests.

use crate::{Checkpoint, ConvLayer, DenseLayer, NetworkConfig, ResidualBlock, VALUE_HIDDEN};
use encoding::{PolicyIndex, POLICY_PLANES};

/// All conv/dense weights and biases zero, scales one. Forward yields zero
/// activations, zero policy logits, and value tanh(0) = 0.
pub fn zero_checkpoint(config: NetworkConfig) -> Checkpoint {
    let c = config.channels;
    let residual = (1..config.blocks)
        .map(|_| ResidualBlock {
            conv1: ConvLayer::zeros(c, c, 3),
            conv2: ConvLayer::zeros(c, c, 3),
        })
        .collect();
    Checkpoint {
        config,
        step: 0,
        conv_in: ConvLayer::zeros(config.input_planes(), c, 3),
        residual,
        policy_conv: ConvLayer::zeros(c, POLICY_PLANES, 1),
        value_conv: ConvLayer::zeros(c, 1, 1),
        value_dense1: DenseLayer::zeros(64, VALUE_HIDDEN),
        value_dense2: DenseLayer::zeros(VALUE_HIDDEN, 1),
    }
}

/// Builds a checkpoint whose channel `k` carries
/// `clip(relu(sum_p coeffs[p] * x[p] + bias))` at every square and every
/// layer: the input conv uses center-only kernels and all residual bodies are
/// zero, so the feature persists unchanged to z^L.
pub fn plant_linear_feature(
    config: NetworkConfig,
    k: usize,
    coeffs: &[(usize, f32)],
    bias: f32,
) -> Checkpoint {
    assert!(k < config.channels, "channel {k} out of range");
    let mut ck = zero_checkpoint(config);
    for &(plane, coeff) in coeffs {
        *ck.conv_in.weight_mut(k, plane, 1, 1) = coeff;
    }
    ck.conv_in.bias[k] = bias;
    ck
}

/// Rewires the value head to compute
/// `tanh(gain * (sum_squares(channel k) - offset))` exactly, using the
/// identity `s - offset = relu(s + limit) - relu(limit + offset)` which holds
/// because activations are nonnegative (`s >= 0 >= -limit`).
pub fn plant_value_sum(ck: &mut Checkpoint, k: usize, gain: f32, offset: f32) {
    let c = ck.config.channels;
    assert!(k < c, "channel {k} out of range");
    let limit = 64.0 * ck.config.clip_max;
    assert!(limit + offset >= 0.0, "offset below -64*clip_max");
    ck.value_conv = ConvLayer::zeros(c, 1, 1);
    *ck.value_conv.weight_mut(0, k, 0, 0) = 1.0;
    ck.value_dense1 = DenseLayer::zeros(64, VALUE_HIDDEN);
    ck.value_dense2 = DenseLayer::zeros(VALUE_HIDDEN, 1);
    // Hidden unit 0: relu(sum + limit); hidden unit 1: relu(limit + offset).
    for i in 0..64 {
        ck.value_dense1.weight[i] = 1.0; // unit 0 row
    }
    ck.value_dense1.bias[0] = limit;
    ck.value_dense1.bias[1] = limit + offset;
    ck.value_dense2.weight[0] = gain;
    ck.value_dense2.weight[1] = -gain;
}

/// Rewires the policy head so that plane `plane`'s logit equals
/// `boost * z^L[k]` at every square while all other planes stay zero; pick a
/// channel whose activation isolates the wanted from-square.
pub fn plant_policy_move(ck: &mut Checkpoint, k: usize, idx: PolicyIndex, boost: f32) {
    let c = ck.config.channels;
    assert!(k < c, "channel {k} out of range");
    ck.policy_conv = ConvLayer::zeros(c, POLICY_PLANES, 1);
    *ck.policy_conv.weight_mut(idx.plane, k, 0, 0) = boost;
}
