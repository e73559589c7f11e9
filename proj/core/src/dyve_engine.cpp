#include "dyve/dyve_engine.hpp"

#include <algorithm>
#include <cmath>

namespace dyve {

namespace {

// Per-channel window term: either the full k*k product sum or the
// grouped single multiply when the window sits in an approximable region.
struct ConvContext {
    const Tensor* input = nullptr;
    const LayerSpec* layer = nullptr;
    const ConvWeights* weights = nullptr;
    const LayerKnobs* cfg = nullptr;
    int h = 0, w = 0, k = 0;
    int h_out = 0, w_out = 0;
    // win_mu[in_channel][window index]: region mean when the window lies in
    // a variance-passing region, NaN otherwise (weight gate applied later).
    std::vector<std::vector<float>> win_mu;
    std::vector<std::uint8_t> wsig_ok;  // [out*in]
    bool sfma_active = false;
    std::vector<int> channel_perm;  // odd/even order when SPET is on
    int check_channels = 0;
};

// Element-wise accumulation into the shared accumulator, matching the
// reference engine's addition sequence exactly.
inline void accumulate_window(const ConvContext& ctx, int out_ch, int in_ch, int r_in0, int c_in0,
                              double& acc) {
    const int k = ctx.k;
    const float* slice =
        ctx.weights->kernel.data() + ctx.weights->slice_offset(out_ch, in_ch, ctx.layer->in_channels, k);
    const float* chan =
        ctx.input->data.data() + static_cast<std::size_t>(in_ch) * ctx.h * ctx.w;
    if (r_in0 >= 0 && c_in0 >= 0 && r_in0 + k <= ctx.h && c_in0 + k <= ctx.w) {
        for (int kr = 0; kr < k; ++kr) {
            const float* row = chan + static_cast<std::size_t>(r_in0 + kr) * ctx.w + c_in0;
            for (int kc = 0; kc < k; ++kc) {
                acc += static_cast<double>(slice[kr * k + kc]) * static_cast<double>(row[kc]);
            }
        }
    } else {
        for (int kr = 0; kr < k; ++kr) {
            const int rr = r_in0 + kr;
            for (int kc = 0; kc < k; ++kc) {
                const int cc = c_in0 + kc;
                const float x = (rr >= 0 && rr < ctx.h && cc >= 0 && cc < ctx.w)
                                    ? chan[static_cast<std::size_t>(rr) * ctx.w + cc]
                                    : 0.0f;
                acc += static_cast<double>(slice[kr * k + kc]) * static_cast<double>(x);
            }
        }
    }
}

// Exact pre-activation with no grouping, for prediction audits.
double replay_exact_neuron(const ConvContext& ctx, int out_ch, int r, int c) {
    const int r_in0 = r * ctx.layer->stride - ctx.layer->pad;
    const int c_in0 = c * ctx.layer->stride - ctx.layer->pad;
    double acc = ctx.weights->bias[out_ch];
    for (int ic = 0; ic < ctx.layer->in_channels; ++ic) {
        accumulate_window(ctx, out_ch, ic, r_in0, c_in0, acc);
    }
    return acc;
}

struct NeuronEval {
    float value = 0.0f;
    NeuronPath path = NeuronPath::ExactFull;
    std::uint32_t spent = 0;
};

NeuronEval evaluate_conv_neuron(const ConvContext& ctx, int out_ch, int r, int c, bool use_spet,
                                LayerOps& ops) {
    const LayerSpec& layer = *ctx.layer;
    const int k = ctx.k;
    const int kk = k * k;
    const int cin = layer.in_channels;
    const int r_in0 = r * layer.stride - layer.pad;
    const int c_in0 = c * layer.stride - layer.pad;
    const std::size_t win_idx = static_cast<std::size_t>(r) * ctx.w_out + c;

    NeuronEval out;
    double acc = ctx.weights->bias[out_ch];
    std::uint64_t mults = 0;
    int processed = 0;
    bool terminated = false;
    std::uint64_t grouped_count = 0;

    const auto process_channel = [&](int ic) {
        bool grouped = false;
        float mu = 0.0f;
        if (ctx.sfma_active && ctx.wsig_ok[static_cast<std::size_t>(out_ch) * cin + ic] != 0) {
            const float m = ctx.win_mu[static_cast<std::size_t>(ic)][win_idx];
            if (!std::isnan(m)) {
                grouped = true;
                mu = m;
            }
        }
        if (grouped) {
            const std::size_t slice = static_cast<std::size_t>(out_ch) * cin + ic;
            acc += static_cast<double>(mu) * static_cast<double>(ctx.weights->kernel_sum[slice]);
            mults += 1;
            ++grouped_count;
        } else {
            accumulate_window(ctx, out_ch, ic, r_in0, c_in0, acc);
            mults += static_cast<std::uint64_t>(kk);
        }
        ++processed;
    };

    if (use_spet) {
        const LayerKnobs& cfg = *ctx.cfg;
        for (int j = 0; j < ctx.check_channels; ++j) process_channel(ctx.channel_perm[j]);
        ops.overhead_ops += 1;
        if (acc < static_cast<double>(cfg.spet_l_thresh)) {
            terminated = true;
            out.value = std::min(cfg.spet_l_thresh, 0.0f);
        } else if (cfg.spet_u_thresh) {
            ops.overhead_ops += 1;
            if (acc > static_cast<double>(*cfg.spet_u_thresh)) {
                terminated = true;
                out.value = *cfg.spet_u_thresh;
            }
        }
        if (!terminated) {
            for (int j = ctx.check_channels; j < cin; ++j) process_channel(ctx.channel_perm[j]);
            out.value = static_cast<float>(acc);
        }
    } else {
        for (int ic = 0; ic < cin; ++ic) process_channel(ic);
        out.value = static_cast<float>(acc);
    }

    ops.multiplies += mults;
    ops.adds += mults;
    ops.saved_sfma += 2ull * grouped_count * (kk - 1);
    if (terminated) {
        ops.saved_spet += 2ull * static_cast<std::uint64_t>(cin - processed) * kk;
        out.path = NeuronPath::SpetTerminated;
    }
    out.spent = static_cast<std::uint32_t>(2 * mults);
    return out;
}

}  // namespace

Tensor dyve_conv_forward(const Tensor& input, const LayerSpec& layer, const ConvWeights& w,
                         const LayerKnobs& cfg, LayerOps& ops, LayerEffort* effort,
                         const DyveOptions& options) {
    if (!input.shape.is_rank3() || input.shape.channels() != layer.in_channels) {
        throw ValidationError("conv input shape " + input.shape.to_string() + " does not match spec");
    }
    cfg.validate();

    ConvContext ctx;
    ctx.input = &input;
    ctx.layer = &layer;
    ctx.weights = &w;
    ctx.cfg = &cfg;
    ctx.h = input.shape.height();
    ctx.w = input.shape.width();
    ctx.k = layer.kernel;
    ctx.h_out = (ctx.h + 2 * layer.pad - ctx.k) / layer.stride + 1;
    ctx.w_out = (ctx.w + 2 * layer.pad - ctx.k) / layer.stride + 1;

    const int cin = layer.in_channels;
    const int cout = layer.out_channels;
    const int kk = ctx.k * ctx.k;
    const std::uint64_t neuron_baseline = 2ull * cin * kk;
    ops.baseline_ops += neuron_baseline * cout * ctx.h_out * ctx.w_out;

    // --- feature-map screening ---
    SfmaScreen screen(layer, w, cfg, 0);
    ctx.sfma_active = screen.enabled();
    if (ctx.sfma_active) {
        const std::size_t per_channel = static_cast<std::size_t>(ctx.h) * ctx.w;
        for (int ic = 0; ic < cin; ++ic) {
            screen.bind_channel(ic, input.data.data() + per_channel * ic, ctx.h, ctx.w, ops);
        }
        ctx.wsig_ok.assign(static_cast<std::size_t>(cout) * cin, 0);
        for (int oc = 0; oc < cout; ++oc) {
            for (int ic = 0; ic < cin; ++ic) {
                const auto decisions = screen.screen(ic, oc, ops);
                bool any = false;
                for (const SfmaDecision& d : decisions) any = any || d.approximate;
                ctx.wsig_ok[static_cast<std::size_t>(oc) * cin + ic] = any ? 1 : 0;
            }
        }
        // Region mean per window position, shared by all output channels.
        ctx.win_mu.assign(static_cast<std::size_t>(cin),
                          std::vector<float>(static_cast<std::size_t>(ctx.h_out) * ctx.w_out,
                                             std::numeric_limits<float>::quiet_NaN()));
        for (int ic = 0; ic < cin; ++ic) {
            auto& grid = ctx.win_mu[static_cast<std::size_t>(ic)];
            for (int r = 0; r < ctx.h_out; ++r) {
                const int a = r * layer.stride - layer.pad;
                for (int c = 0; c < ctx.w_out; ++c) {
                    const int b = c * layer.stride - layer.pad;
                    grid[static_cast<std::size_t>(r) * ctx.w_out + c] = screen.window_region_mean(ic, a, b);
                }
            }
        }
    }

    // --- saturation-prediction setup ---
    const bool use_spet = cfg.spet_enabled;
    if (use_spet) {
        ctx.channel_perm = rearrange_odd_even(cin);
        ctx.check_channels = std::clamp(
            static_cast<int>(std::ceil(static_cast<double>(cfg.prediction_fraction) * cin)), 1, cin);
    }

    Tensor out(Shape(cout, ctx.h_out, ctx.w_out));
    if (effort && options.record_effort) {
        effort->out_shape = out.shape;
        effort->outcomes.assign(out.shape.elements(), NeuronOutcome{});
    }

    const bool use_sdss = cfg.sdss_enabled && cfg.sp > 1;
    SdssSchedule schedule;
    if (use_sdss) schedule = sdss_schedule(ctx.h_out, ctx.w_out, cfg.sp);

    std::vector<std::uint8_t> computed;
    std::vector<float> neighbors;
    neighbors.reserve(8);
    static const int kDirs[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};

    for (int oc = 0; oc < cout; ++oc) {
        float* out_grid = out.data.data() + static_cast<std::size_t>(oc) * ctx.h_out * ctx.w_out;
        const auto record = [&](int r, int c, const NeuronEval& ev, NeuronPath path) {
            out_grid[static_cast<std::size_t>(r) * ctx.w_out + c] = ev.value;
            if (effort && options.record_effort) {
                NeuronOutcome& o =
                    effort->outcomes[(static_cast<std::size_t>(oc) * ctx.h_out + r) * ctx.w_out + c];
                o.value = ev.value;
                o.path = path;
                o.ops_spent = ev.spent;
                o.ops_baseline = static_cast<std::uint32_t>(neuron_baseline);
                if (options.replay_exact && path == NeuronPath::SpetTerminated) {
                    o.exact_pre = static_cast<float>(replay_exact_neuron(ctx, oc, r, c));
                }
            }
        };

        if (!use_sdss) {
            for (int r = 0; r < ctx.h_out; ++r) {
                for (int c = 0; c < ctx.w_out; ++c) {
                    const NeuronEval ev = evaluate_conv_neuron(ctx, oc, r, c, use_spet, ops);
                    record(r, c, ev, ev.path);
                }
            }
            continue;
        }

        computed.assign(static_cast<std::size_t>(ctx.h_out) * ctx.w_out, 0);
        for (const auto& [r, c] : schedule.sampled) {
            const NeuronEval ev = evaluate_conv_neuron(ctx, oc, r, c, use_spet, ops);
            record(r, c, ev, ev.path);
            computed[static_cast<std::size_t>(r) * ctx.w_out + c] = 1;
        }
        for (const auto& [r, c] : schedule.deferred) {
            neighbors.clear();
            for (const auto& dir : kDirs) {
                for (int step = 1; step <= cfg.sp; ++step) {
                    const int rr = r + dir[0] * step;
                    const int cc = c + dir[1] * step;
                    if (rr < 0 || rr >= ctx.h_out || cc < 0 || cc >= ctx.w_out) break;
                    if (computed[static_cast<std::size_t>(rr) * ctx.w_out + cc]) {
                        neighbors.push_back(out_grid[static_cast<std::size_t>(rr) * ctx.w_out + cc]);
                        break;
                    }
                }
            }
            const SdssDecision d = sdss_decide(neighbors, cfg, ops);
            if (d.approximate) {
                NeuronEval ev;
                ev.value = d.value;
                ev.spent = 0;
                ops.saved_sdss += neuron_baseline;
                record(r, c, ev, NeuronPath::SdssApproximated);
            } else {
                // computed exactly, without the saturation check
                const NeuronEval ev = evaluate_conv_neuron(ctx, oc, r, c, false, ops);
                record(r, c, ev, ev.path);
            }
            computed[static_cast<std::size_t>(r) * ctx.w_out + c] = 1;
        }
    }
    return out;
}

Tensor dyve_fc_forward(const Tensor& input, const LayerSpec& layer, const FcWeights& w,
                       const LayerKnobs& cfg, LayerOps& ops, LayerEffort* effort,
                       const DyveOptions& options) {
    if (input.shape.elements() != static_cast<std::size_t>(layer.in_features)) {
        throw ValidationError("fc input length does not match in_features");
    }
    cfg.validate();
    const int n = layer.in_features;
    const int out_n = layer.out_features;
    const std::uint64_t neuron_baseline = 2ull * n;
    ops.baseline_ops += neuron_baseline * out_n;

    Tensor out(Shape(out_n));
    if (effort && options.record_effort) {
        effort->out_shape = Shape(1, 1, out_n);
        effort->outcomes.assign(static_cast<std::size_t>(out_n), NeuronOutcome{});
    }

    const bool use_spet = cfg.spet_enabled;
    std::vector<int> perm;
    std::vector<float> x_perm, w_perm;
    if (use_spet) {
        perm = rearrange_odd_even(n);
        x_perm.resize(static_cast<std::size_t>(n));
        w_perm.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x_perm[i] = input.data[perm[i]];
    }

    for (int j = 0; j < out_n; ++j) {
        const float* row = w.weight.data() + static_cast<std::size_t>(j) * n;
        NeuronOutcome o;
        o.ops_baseline = static_cast<std::uint32_t>(neuron_baseline);
        if (use_spet) {
            for (int i = 0; i < n; ++i) w_perm[i] = row[perm[i]];
            const SpetResult res = spet_dot(x_perm, w_perm, w.bias[j], cfg, ops);
            out.data[j] = res.pre_activation;
            o.value = res.pre_activation;
            o.ops_spent = static_cast<std::uint32_t>(2 * res.processed);
            if (res.terminated) {
                o.path = NeuronPath::SpetTerminated;
                ops.saved_spet += 2ull * static_cast<std::uint64_t>(n - res.processed);
                if (options.replay_exact) {
                    double acc = w.bias[j];
                    for (int i = 0; i < n; ++i) {
                        acc += static_cast<double>(row[i]) * static_cast<double>(input.data[i]);
                    }
                    o.exact_pre = static_cast<float>(acc);
                }
            }
        } else {
            double acc = w.bias[j];
            for (int i = 0; i < n; ++i) {
                acc += static_cast<double>(row[i]) * static_cast<double>(input.data[i]);
            }
            ops.multiplies += static_cast<std::uint64_t>(n);
            ops.adds += static_cast<std::uint64_t>(n);
            out.data[j] = static_cast<float>(acc);
            o.value = out.data[j];
            o.ops_spent = static_cast<std::uint32_t>(neuron_baseline);
        }
        if (effort && options.record_effort) effort->outcomes[static_cast<std::size_t>(j)] = o;
    }
    return out;
}

DyveTrace dyve_forward(const Network& net, const Tensor& input, const KnobConfig& cfg,
                       const DyveOptions& options) {
    if (input.shape != net.input_shape) {
        throw ValidationError("input shape " + input.shape.to_string() + " does not match network input " +
                              net.input_shape.to_string());
    }
    if (cfg.layers.size() != net.layers.size()) {
        throw ConfigError("knob config has " + std::to_string(cfg.layers.size()) + " entries for " +
                          std::to_string(net.layers.size()) + " layers");
    }
    DyveTrace trace;
    trace.counters = OpCounters(net.layers.size());
    trace.outputs.reserve(net.layers.size());
    trace.effort.resize(net.layers.size());
    const Tensor* cur = &input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        LayerOps& ops = trace.counters.layer(static_cast<int>(i));
        LayerEffort* eff = &trace.effort[i];
        Tensor out;
        switch (s.kind) {
            case LayerKind::Conv:
                out = dyve_conv_forward(*cur, s, net.weights.conv[i], cfg.layers[i], ops, eff, options);
                break;
            case LayerKind::FullyConnected:
                out = dyve_fc_forward(*cur, s, net.weights.fc[i], cfg.layers[i], ops, eff, options);
                break;
            case LayerKind::ReLU:
                out = relu(*cur, ops);
                break;
            case LayerKind::MaxPool:
                out = maxpool(*cur, s, ops);
                break;
            case LayerKind::Softmax:
                out = softmax(*cur);
                break;
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
