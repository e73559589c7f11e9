#include "dyve/model.hpp"

#include <cmath>
#include <cstdlib>

namespace dyve {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Conv: return "conv";
        case LayerKind::FullyConnected: return "fc";
        case LayerKind::ReLU: return "relu";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "conv") return LayerKind::Conv;
    if (name == "fc") return LayerKind::FullyConnected;
    if (name == "relu") return LayerKind::ReLU;
    if (name == "maxpool") return LayerKind::MaxPool;
    if (name == "softmax") return LayerKind::Softmax;
    throw ValidationError("unknown layer kind '" + name + "'");
}

LayerSpec conv_layer(int in_channels, int out_channels, int kernel, int stride, int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.pad = pad;
    return s;
}

LayerSpec fc_layer(int in_features, int out_features) {
    LayerSpec s;
    s.kind = LayerKind::FullyConnected;
    s.in_features = in_features;
    s.out_features = out_features;
    return s;
}

LayerSpec relu_layer() {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    return s;
}

LayerSpec maxpool_layer(int window, int stride) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool;
    s.window = window;
    s.pool_stride = stride;
    return s;
}

LayerSpec softmax_layer() {
    LayerSpec s;
    s.kind = LayerKind::Softmax;
    return s;
}

namespace {

void check_spec(const LayerSpec& s, int index) {
    const std::string where = "layer " + std::to_string(index);
    switch (s.kind) {
        case LayerKind::Conv:
            if (s.in_channels < 1 || s.out_channels < 1) throw ValidationError(where + ": conv channels must be >= 1");
            if (s.kernel < 1 || s.stride < 1) throw ValidationError(where + ": conv kernel/stride must be >= 1");
            if (s.pad < 0) throw ValidationError(where + ": conv padding must be >= 0");
            break;
        case LayerKind::FullyConnected:
            if (s.in_features < 1 || s.out_features < 1) throw ValidationError(where + ": fc features must be >= 1");
            break;
        case LayerKind::MaxPool:
            if (s.window < 1 || s.pool_stride < 1) throw ValidationError(where + ": pool window/stride must be >= 1");
            break;
        default:
            break;
    }
}

}  // namespace

std::vector<Shape> infer_shapes(const Network& net) {
    std::vector<Shape> shapes;
    shapes.reserve(net.layers.size());
    Shape cur = net.input_shape;
    cur.validate();
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        check_spec(s, static_cast<int>(i));
        const std::string where = "layer " + std::to_string(i) + " (" + layer_kind_name(s.kind) + ")";
        switch (s.kind) {
            case LayerKind::Conv: {
                if (!cur.is_rank3()) throw ValidationError(where + ": conv input must be rank-3, got " + cur.to_string());
                if (cur.channels() != s.in_channels) {
                    throw ValidationError(where + ": expects " + std::to_string(s.in_channels) +
                                          " input channels, got " + cur.to_string());
                }
                if (cur.height() + 2 * s.pad < s.kernel || cur.width() + 2 * s.pad < s.kernel) {
                    throw ValidationError(where + ": kernel larger than padded input " + cur.to_string());
                }
                const int h = (cur.height() + 2 * s.pad - s.kernel) / s.stride + 1;
                const int w = (cur.width() + 2 * s.pad - s.kernel) / s.stride + 1;
                cur = Shape(s.out_channels, h, w);
                break;
            }
            case LayerKind::FullyConnected: {
                if (static_cast<std::size_t>(s.in_features) != cur.elements()) {
                    throw ValidationError(where + ": expects " + std::to_string(s.in_features) +
                                          " input features, got " + cur.to_string());
                }
                cur = Shape(s.out_features);
                break;
            }
            case LayerKind::ReLU:
            case LayerKind::Softmax:
                break;
            case LayerKind::MaxPool: {
                if (!cur.is_rank3()) throw ValidationError(where + ": pool input must be rank-3");
                if (cur.height() < s.window || cur.width() < s.window) {
                    throw ValidationError(where + ": window larger than input " + cur.to_string());
                }
                const int h = (cur.height() - s.window) / s.pool_stride + 1;
                const int w = (cur.width() - s.window) / s.pool_stride + 1;
                cur = Shape(cur.channels(), h, w);
                break;
            }
        }
        shapes.push_back(cur);
    }
    return shapes;
}

void allocate_weights(Network& net) {
    net.weights.conv.assign(net.layers.size(), ConvWeights{});
    net.weights.fc.assign(net.layers.size(), FcWeights{});
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        if (s.kind == LayerKind::Conv) {
            ConvWeights& w = net.weights.conv[i];
            w.kernel.assign(static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel, 0.0f);
            w.bias.assign(s.out_channels, 0.0f);
            w.kernel_sum.assign(static_cast<std::size_t>(s.out_channels) * s.in_channels, 0.0f);
            w.kernel_abs_sum.assign(static_cast<std::size_t>(s.out_channels) * s.in_channels, 0.0f);
        } else if (s.kind == LayerKind::FullyConnected) {
            FcWeights& w = net.weights.fc[i];
            w.weight.assign(static_cast<std::size_t>(s.out_features) * s.in_features, 0.0f);
            w.bias.assign(s.out_features, 0.0f);
        }
    }
}

void precompute_kernel_sums(Network& net) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        if (s.kind != LayerKind::Conv) continue;
        ConvWeights& w = net.weights.conv[i];
        const int kk = s.kernel * s.kernel;
        for (int o = 0; o < s.out_channels; ++o) {
            for (int c = 0; c < s.in_channels; ++c) {
                const std::size_t off = w.slice_offset(o, c, s.in_channels, s.kernel);
                double sum = 0.0, abs_sum = 0.0;
                for (int j = 0; j < kk; ++j) {
                    const double v = w.kernel[off + j];
                    sum += v;
                    abs_sum += std::abs(v);
                }
                const std::size_t idx = static_cast<std::size_t>(o) * s.in_channels + c;
                w.kernel_sum[idx] = static_cast<float>(sum);
                w.kernel_abs_sum[idx] = static_cast<float>(abs_sum);
            }
        }
    }
}

bool kernel_sums_consistent(const Network& net) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        if (s.kind != LayerKind::Conv) continue;
        const ConvWeights& w = net.weights.conv[i];
        const int kk = s.kernel * s.kernel;
        for (int o = 0; o < s.out_channels; ++o) {
            for (int c = 0; c < s.in_channels; ++c) {
                const std::size_t off = w.slice_offset(o, c, s.in_channels, s.kernel);
                double sum = 0.0, abs_sum = 0.0;
                for (int j = 0; j < kk; ++j) {
                    const double v = w.kernel[off + j];
                    sum += v;
                    abs_sum += std::abs(v);
                }
                const std::size_t idx = static_cast<std::size_t>(o) * s.in_channels + c;
                const auto close = [](double a, double b) {
                    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
                    return std::abs(a - b) <= 1e-6 * scale;
                };
                if (!close(sum, w.kernel_sum[idx]) || !close(abs_sum, w.kernel_abs_sum[idx])) return false;
            }
        }
    }
    return true;
}

void validate_network(const Network& net) {
    if (net.class_count < 1) throw ValidationError("class_count must be >= 1");
    if (net.weights.conv.size() != net.layers.size() || net.weights.fc.size() != net.layers.size()) {
        throw ValidationError("weight table size does not match layer count");
    }
    const std::vector<Shape> shapes = infer_shapes(net);
    if (shapes.empty() || shapes.back().elements() != static_cast<std::size_t>(net.class_count)) {
        throw ValidationError("final layer output does not match class_count " + std::to_string(net.class_count));
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        const std::string where = "layer " + std::to_string(i);
        if (s.kind == LayerKind::Conv) {
            const ConvWeights& w = net.weights.conv[i];
            const std::size_t kern = static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel;
            const std::size_t slices = static_cast<std::size_t>(s.out_channels) * s.in_channels;
            if (w.kernel.size() != kern || w.bias.size() != static_cast<std::size_t>(s.out_channels) ||
                w.kernel_sum.size() != slices || w.kernel_abs_sum.size() != slices) {
                throw ValidationError(where + ": conv weight storage does not match spec");
            }
        } else if (s.kind == LayerKind::FullyConnected) {
            const FcWeights& w = net.weights.fc[i];
            if (w.weight.size() != static_cast<std::size_t>(s.out_features) * s.in_features ||
                w.bias.size() != static_cast<std::size_t>(s.out_features)) {
                throw ValidationError(where + ": fc weight storage does not match spec");
            }
        }
    }
    if (!kernel_sums_consistent(net)) {
        throw ValidationError("precomputed kernel sums do not match stored kernels");
    }
}

std::size_t parameter_count(const Network& net) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        n += net.weights.conv[i].kernel.size() + net.weights.conv[i].bias.size();
        n += net.weights.fc[i].weight.size() + net.weights.fc[i].bias.size();
    }
    return n;
}

}  // namespace dyve
