#pragma once

#include <limits>

#include "dyve/effort_knobs.hpp"
#include "dyve/knob_config.hpp"
#include "dyve/model.hpp"
#include "dyve/op_counters.hpp"
#include "dyve/reference_engine.hpp"

namespace dyve {

enum class NeuronPath : std::uint8_t { ExactFull, SpetTerminated, SdssApproximated };

/// What one output neuron cost under the knobs. ops are useful
/// dot-product work only (mult+add); knob bookkeeping is charged to the
/// layer's overhead, so ops_spent <= ops_baseline always.
struct NeuronOutcome {
    float value = 0.0f;
    float exact_pre = std::numeric_limits<float>::quiet_NaN();  // diagnostic replay only
    NeuronPath path = NeuronPath::ExactFull;
    std::uint32_t ops_spent = 0;
    std::uint32_t ops_baseline = 0;
};

/// Per-layer outcome grid, laid out like the layer's output tensor.
/// Empty for layers the knobs never touch.
struct LayerEffort {
    Shape out_shape;
    std::vector<NeuronOutcome> outcomes;

    const NeuronOutcome& at(int ch, int r, int c) const {
        return outcomes[(static_cast<std::size_t>(ch) * out_shape.height() + r) * out_shape.width() + c];
    }
};

struct DyveTrace {
    std::vector<Tensor> outputs;
    OpCounters counters;
    std::vector<LayerEffort> effort;
    int predicted_class = -1;
    std::vector<float> scores;
};

struct DyveOptions {
    bool record_effort = true;
    /// Also evaluate the exact pre-activation of every SPET-terminated
    /// neuron (uncounted) so prediction quality can be audited.
    bool replay_exact = false;
};

/// Convolution under the three effort knobs. Feature-map screening first
/// (it regroups window inputs), saturation prediction on the grouped
/// channel sequence at the sampled positions, selective sampling deciding
/// which neurons are evaluated at all; deferred-but-exact neurons skip
/// the saturation check. Activation is applied by the following ReLU
/// layer unchanged.
Tensor dyve_conv_forward(const Tensor& input, const LayerSpec& layer, const ConvWeights& w,
                         const LayerKnobs& cfg, LayerOps& ops, LayerEffort* effort,
                         const DyveOptions& options = {});

/// Fully connected layer: saturation prediction over odd/even-rearranged
/// scalar inputs; sampling and feature-map approximation never apply.
Tensor dyve_fc_forward(const Tensor& input, const LayerSpec& layer, const FcWeights& w,
                       const LayerKnobs& cfg, LayerOps& ops, LayerEffort* effort,
                       const DyveOptions& options = {});

/// Full variable-effort forward pass. With every knob disabled the trace
/// is bit-identical to the reference engine, including op counts.
DyveTrace dyve_forward(const Network& net, const Tensor& input, const KnobConfig& cfg,
                       const DyveOptions& options = {});

}  // namespace dyve
