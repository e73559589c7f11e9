#include "dyve/reference_engine.hpp"

#include <cmath>

namespace dyve {

Tensor conv_forward_exact(const Tensor& input, const LayerSpec& layer, const ConvWeights& w, LayerOps& ops) {
    if (!input.shape.is_rank3() || input.shape.channels() != layer.in_channels) {
        throw ValidationError("conv input shape " + input.shape.to_string() + " does not match spec");
    }
    const int h = input.shape.height();
    const int wd = input.shape.width();
    const int k = layer.kernel;
    const int h_out = (h + 2 * layer.pad - k) / layer.stride + 1;
    const int w_out = (wd + 2 * layer.pad - k) / layer.stride + 1;
    Tensor out(Shape(layer.out_channels, h_out, w_out));

    for (int o = 0; o < layer.out_channels; ++o) {
        const double bias = w.bias[o];
        for (int r = 0; r < h_out; ++r) {
            const int r_in0 = r * layer.stride - layer.pad;
            for (int c = 0; c < w_out; ++c) {
                const int c_in0 = c * layer.stride - layer.pad;
                const bool interior = r_in0 >= 0 && c_in0 >= 0 && r_in0 + k <= h && c_in0 + k <= wd;
                double acc = bias;
                for (int ic = 0; ic < layer.in_channels; ++ic) {
                    const float* slice = w.kernel.data() + w.slice_offset(o, ic, layer.in_channels, k);
                    const float* chan = input.data.data() +
                                        static_cast<std::size_t>(ic) * h * wd;
                    if (interior) {
                        for (int kr = 0; kr < k; ++kr) {
                            const float* row = chan + static_cast<std::size_t>(r_in0 + kr) * wd + c_in0;
                            for (int kc = 0; kc < k; ++kc) {
                                acc += static_cast<double>(slice[kr * k + kc]) * static_cast<double>(row[kc]);
                            }
                        }
                    } else {
                        for (int kr = 0; kr < k; ++kr) {
                            const int rr = r_in0 + kr;
                            for (int kc = 0; kc < k; ++kc) {
                                const int cc = c_in0 + kc;
                                const float x = (rr >= 0 && rr < h && cc >= 0 && cc < wd)
                                                    ? chan[static_cast<std::size_t>(rr) * wd + cc]
                                                    : 0.0f;
                                acc += static_cast<double>(slice[kr * k + kc]) * static_cast<double>(x);
                            }
                        }
                    }
                }
                out.at(o, r, c) = static_cast<float>(acc);
                const std::uint64_t n = static_cast<std::uint64_t>(layer.in_channels) * k * k;
                ops.multiplies += n;
                ops.adds += n;
            }
        }
    }
    ops.baseline_ops += 2ull * layer.out_channels * h_out * w_out * layer.in_channels * k * k;
    return out;
}

Tensor fc_forward_exact(const Tensor& input, const LayerSpec& layer, const FcWeights& w, LayerOps& ops) {
    if (input.shape.elements() != static_cast<std::size_t>(layer.in_features)) {
        throw ValidationError("fc input length " + std::to_string(input.shape.elements()) +
                              " does not match in_features " + std::to_string(layer.in_features));
    }
    Tensor out(Shape(layer.out_features));
    for (int j = 0; j < layer.out_features; ++j) {
        double acc = w.bias[j];
        const float* row = w.weight.data() + static_cast<std::size_t>(j) * layer.in_features;
        for (int i = 0; i < layer.in_features; ++i) {
            acc += static_cast<double>(row[i]) * static_cast<double>(input.data[i]);
        }
        out.data[j] = static_cast<float>(acc);
        ops.multiplies += layer.in_features;
        ops.adds += layer.in_features;
    }
    ops.baseline_ops += 2ull * layer.out_features * layer.in_features;
    return out;
}

Tensor relu(const Tensor& input, LayerOps& ops) {
    (void)ops;  // activation work is uniform in both engines; uncounted
    Tensor out(input.shape);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        out.data[i] = input.data[i] > 0.0f ? input.data[i] : 0.0f;
    }
    return out;
}

Tensor maxpool(const Tensor& input, const LayerSpec& layer, LayerOps& ops) {
    if (!input.shape.is_rank3()) throw ValidationError("maxpool input must be rank-3");
    const int h = input.shape.height();
    const int wd = input.shape.width();
    const int win = layer.window;
    const int h_out = (h - win) / layer.pool_stride + 1;
    const int w_out = (wd - win) / layer.pool_stride + 1;
    Tensor out(Shape(input.shape.channels(), h_out, w_out));
    for (int ch = 0; ch < input.shape.channels(); ++ch) {
        for (int r = 0; r < h_out; ++r) {
            for (int c = 0; c < w_out; ++c) {
                const int r0 = r * layer.pool_stride;
                const int c0 = c * layer.pool_stride;
                float m = input.at(ch, r0, c0);
                for (int kr = 0; kr < win; ++kr) {
                    for (int kc = 0; kc < win; ++kc) {
                        if (kr == 0 && kc == 0) continue;
                        const float v = input.at(ch, r0 + kr, c0 + kc);
                        if (v > m) m = v;
                    }
                }
                out.at(ch, r, c) = m;
                ops.compares += static_cast<std::uint64_t>(win) * win - 1;
            }
        }
    }
    ops.baseline_ops += (static_cast<std::uint64_t>(win) * win - 1) * out.shape.elements();
    return out;
}

Tensor softmax(const Tensor& input) {
    Tensor out(input.shape);
    float mx = input.data[0];
    for (float v : input.data) {
        if (v > mx) mx = v;
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        const double e = std::exp(static_cast<double>(input.data[i]) - static_cast<double>(mx));
        out.data[i] = static_cast<float>(e);
        denom += e;
    }
    for (float& v : out.data) v = static_cast<float>(v / denom);
    return out;
}

int argmax_class(const std::vector<float>& scores) {
    int best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = static_cast<int>(i);
    }
    return best;
}

ForwardTrace forward(const Network& net, const Tensor& input) {
    if (input.shape != net.input_shape) {
        throw ValidationError("input shape " + input.shape.to_string() + " does not match network input " +
                              net.input_shape.to_string());
    }
    ForwardTrace trace;
    trace.counters = OpCounters(net.layers.size());
    trace.outputs.reserve(net.layers.size());
    const Tensor* cur = &input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        LayerOps& ops = trace.counters.layer(static_cast<int>(i));
        Tensor out;
        switch (s.kind) {
            case LayerKind::Conv: out = conv_forward_exact(*cur, s, net.weights.conv[i], ops); break;
            case LayerKind::FullyConnected: out = fc_forward_exact(*cur, s, net.weights.fc[i], ops); break;
            case LayerKind::ReLU: out = relu(*cur, ops); break;
            case LayerKind::MaxPool: out = maxpool(*cur, s, ops); break;
            case LayerKind::Softmax: out = softmax(*cur); break;
        }
        if (!out.all_finite()) {
            throw ValidationError("non-finite values produced by layer " + std::to_string(i));
        }
        trace.outputs.push_back(std::move(out));
        cur = &trace.outputs.back();
    }
    trace.scores = trace.outputs.back().data;
    trace.predicted_class = argmax_class(trace.scores);
    return trace;
}

}  // namespace dyve
