#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyve/tensor.hpp"

namespace dyve {

enum class LayerKind { Conv, FullyConnected, ReLU, MaxPool, Softmax };

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

/// One layer of the network. Fields without meaning for a kind stay zero.
/// Kernels and pooling windows are square.
struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    // Conv
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int pad = 0;
    // FullyConnected
    int in_features = 0;
    int out_features = 0;
    // MaxPool
    int window = 0;
    int pool_stride = 1;
};

LayerSpec conv_layer(int in_channels, int out_channels, int kernel, int stride = 1, int pad = 0);
LayerSpec fc_layer(int in_features, int out_features);
LayerSpec relu_layer();
LayerSpec maxpool_layer(int window, int stride);
LayerSpec softmax_layer();

/// Weights for one conv layer: kernel tensor flattened as
/// [out][in][k][k], plus per (out,in) kernel-slice sums used by the
/// single-multiply feature-map approximation.
struct ConvWeights {
    std::vector<float> kernel;        // out*in*k*k
    std::vector<float> bias;          // out
    std::vector<float> kernel_sum;    // out*in, sum of slice weights
    std::vector<float> kernel_abs_sum;// out*in, sum of |w|

    std::size_t slice_offset(int out_ch, int in_ch, int in_channels, int k) const {
        return (static_cast<std::size_t>(out_ch) * in_channels + in_ch) * k * k;
    }
};

struct FcWeights {
    std::vector<float> weight;  // out*in, row-major by output
    std::vector<float> bias;    // out
};

/// All parameters of a network. Indexed by layer; non-parametric layers
/// hold empty entries.
struct Weights {
    std::vector<ConvWeights> conv;  // one per layer index
    std::vector<FcWeights> fc;      // one per layer index
};

struct Network {
    std::vector<LayerSpec> layers;
    Weights weights;
    Shape input_shape;
    int class_count = 0;

    const ConvWeights& conv_weights(int layer) const { return weights.conv[layer]; }
    const FcWeights& fc_weights(int layer) const { return weights.fc[layer]; }
    ConvWeights& conv_weights(int layer) { return weights.conv[layer]; }
    FcWeights& fc_weights(int layer) { return weights.fc[layer]; }
};

/// Output shape of each layer under standard conv arithmetic
/// (H_out = floor((H + 2*pad - k)/stride) + 1). Throws ValidationError
/// naming the offending layer on any mismatch.
std::vector<Shape> infer_shapes(const Network& net);

/// Recompute kernel_sum/kernel_abs_sum for every conv layer from the
/// stored kernels (double accumulation, rounded to f32).
void precompute_kernel_sums(Network& net);

/// Checks stored kernel sums against recomputation (1e-6 relative).
bool kernel_sums_consistent(const Network& net);

/// Allocates zeroed weight storage matching the layer specs.
void allocate_weights(Network& net);

/// Structural validation: specs sane, weight array lengths match,
/// shape inference succeeds, final output length equals class_count.
void validate_network(const Network& net);

std::size_t parameter_count(const Network& net);

}  // namespace dyve
