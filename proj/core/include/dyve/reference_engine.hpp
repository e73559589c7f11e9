#pragma once

#include "dyve/model.hpp"
#include "dyve/op_counters.hpp"
#include "dyve/tensor.hpp"

namespace dyve {

/// Result of one exact forward pass: every intermediate tensor, the
/// per-layer op tallies, and the decision.
struct ForwardTrace {
    std::vector<Tensor> outputs;  // one per layer
    OpCounters counters;
    int predicted_class = -1;
    std::vector<float> scores;
};

/// Exact convolution, direct loops, accumulation order fixed as
/// channel-major then row-major within the window; bias first; double
/// accumulator rounded to f32 per output. Charges in*k*k multiplies and
/// adds per output neuron.
Tensor conv_forward_exact(const Tensor& input, const LayerSpec& layer, const ConvWeights& w, LayerOps& ops);

Tensor fc_forward_exact(const Tensor& input, const LayerSpec& layer, const FcWeights& w, LayerOps& ops);

Tensor relu(const Tensor& input, LayerOps& ops);

/// Window max with conv-style output arithmetic (no padding). Charges
/// window*window-1 comparisons per output.
Tensor maxpool(const Tensor& input, const LayerSpec& layer, LayerOps& ops);

/// Numerically stabilized by max subtraction; not counted toward the
/// savings denominators.
Tensor softmax(const Tensor& input);

/// Knob-free forward pass: the correctness oracle and the baseline for
/// all savings ratios. Deterministic; argmax ties break to the lowest
/// class index.
ForwardTrace forward(const Network& net, const Tensor& input);

int argmax_class(const std::vector<float>& scores);

}  // namespace dyve
