#include "dyve/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dyve {

double reduction_ratio(const OpCounters& baseline, const OpCounters& dyve_run) {
    const std::uint64_t base = baseline.total_spent();
    const std::uint64_t dyve_total = dyve_run.total_spent() + dyve_run.total_overhead();
    if (dyve_total == 0) throw ValidationError("reduction_ratio: variable-effort op total is zero");
    return static_cast<double>(base) / static_cast<double>(dyve_total);
}

KnobAttribution knob_attribution(const OpCounters& dyve_run) {
    KnobAttribution a;
    for (const LayerOps& l : dyve_run.layers) {
        a.spet += l.saved_spet;
        a.sdss += l.saved_sdss;
        a.sfma += l.saved_sfma;
    }
    return a;
}

SaturationProfile saturation_profile(const Network& net, const std::vector<Tensor>& inputs) {
    SaturationProfile profile;
    std::vector<std::uint64_t> zeros;
    std::vector<std::uint64_t> totals;
    for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::Conv && net.layers[i + 1].kind == LayerKind::ReLU) {
            profile.conv_layers.push_back(static_cast<int>(i));
            zeros.push_back(0);
            totals.push_back(0);
        }
    }
    for (const Tensor& input : inputs) {
        const ForwardTrace trace = forward(net, input);
        for (std::size_t j = 0; j < profile.conv_layers.size(); ++j) {
            const Tensor& relu_out = trace.outputs[static_cast<std::size_t>(profile.conv_layers[j]) + 1];
            for (float v : relu_out.data) {
                if (v == 0.0f) ++zeros[j];
            }
            totals[j] += relu_out.data.size();
        }
    }
    for (std::size_t j = 0; j < zeros.size(); ++j) {
        profile.zero_fraction.push_back(totals[j] ? static_cast<double>(zeros[j]) / static_cast<double>(totals[j])
                                                  : 0.0);
    }
    return profile;
}

PredictionAccuracyProfile prediction_accuracy_profile(const Network& net,
                                                      const std::vector<Tensor>& inputs,
                                                      const std::vector<double>& intervals) {
    PredictionAccuracyProfile profile;
    profile.intervals = intervals;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::Conv) profile.conv_layers.push_back(static_cast<int>(i));
    }
    // predicted[layer][interval], correct[layer][interval]
    std::vector<std::vector<std::uint64_t>> predicted(profile.conv_layers.size(),
                                                      std::vector<std::uint64_t>(intervals.size(), 0));
    std::vector<std::vector<std::uint64_t>> correct = predicted;

    for (const Tensor& input : inputs) {
        const ForwardTrace trace = forward(net, input);
        for (std::size_t li = 0; li < profile.conv_layers.size(); ++li) {
            const int layer_index = profile.conv_layers[li];
            const LayerSpec& layer = net.layers[static_cast<std::size_t>(layer_index)];
            const ConvWeights& w = net.weights.conv[static_cast<std::size_t>(layer_index)];
            const Tensor& lin = layer_index == 0 ? input : trace.outputs[static_cast<std::size_t>(layer_index) - 1];
            const Tensor& lout = trace.outputs[static_cast<std::size_t>(layer_index)];
            const int h = lin.shape.height();
            const int wd = lin.shape.width();
            const int k = layer.kernel;
            const int h_out = lout.shape.height();
            const int w_out = lout.shape.width();
            const std::vector<int> perm = rearrange_odd_even(layer.in_channels);
            for (std::size_t ii = 0; ii < intervals.size(); ++ii) {
                const int check = std::clamp(
                    static_cast<int>(std::ceil(intervals[ii] * layer.in_channels)), 1, layer.in_channels);
                for (int o = 0; o < layer.out_channels; ++o) {
                    for (int r = 0; r < h_out; ++r) {
                        for (int c = 0; c < w_out; ++c) {
                            const int r_in0 = r * layer.stride - layer.pad;
                            const int c_in0 = c * layer.stride - layer.pad;
                            double partial = w.bias[o];
                            for (int j = 0; j < check; ++j) {
                                const int ic = perm[static_cast<std::size_t>(j)];
                                const float* slice = w.kernel.data() + w.slice_offset(o, ic, layer.in_channels, k);
                                const float* chan = lin.data.data() + static_cast<std::size_t>(ic) * h * wd;
                                for (int kr = 0; kr < k; ++kr) {
                                    const int rr = r_in0 + kr;
                                    for (int kc = 0; kc < k; ++kc) {
                                        const int cc = c_in0 + kc;
                                        const float x = (rr >= 0 && rr < h && cc >= 0 && cc < wd)
                                                            ? chan[static_cast<std::size_t>(rr) * wd + cc]
                                                            : 0.0f;
                                        partial += static_cast<double>(slice[kr * k + kc]) * static_cast<double>(x);
                                    }
                                }
                            }
                            if (partial < 0.0) {
                                ++predicted[li][ii];
                                if (lout.at(o, r, c) <= 0.0f) ++correct[li][ii];
                            }
                        }
                    }
                }
            }
        }
    }

    profile.per_layer.assign(profile.conv_layers.size(), std::vector<double>(intervals.size(), 1.0));
    profile.aggregate.assign(intervals.size(), 1.0);
    std::vector<std::uint64_t> agg_pred(intervals.size(), 0), agg_corr(intervals.size(), 0);
    for (std::size_t li = 0; li < profile.conv_layers.size(); ++li) {
        for (std::size_t ii = 0; ii < intervals.size(); ++ii) {
            if (predicted[li][ii] > 0) {
                profile.per_layer[li][ii] =
                    static_cast<double>(correct[li][ii]) / static_cast<double>(predicted[li][ii]);
            }
            agg_pred[ii] += predicted[li][ii];
            agg_corr[ii] += correct[li][ii];
        }
    }
    for (std::size_t ii = 0; ii < intervals.size(); ++ii) {
        if (agg_pred[ii] > 0) {
            profile.aggregate[ii] = static_cast<double>(agg_corr[ii]) / static_cast<double>(agg_pred[ii]);
        }
    }
    return profile;
}

EffortMap effort_map_from_trace(const DyveTrace& trace, int layer, int channel) {
    if (layer < 0 || static_cast<std::size_t>(layer) >= trace.effort.size()) {
        throw BoundsError("effort map layer " + std::to_string(layer) + " out of range");
    }
    const LayerEffort& eff = trace.effort[static_cast<std::size_t>(layer)];
    if (eff.outcomes.empty()) {
        throw ValidationError("layer " + std::to_string(layer) + " records no per-neuron effort");
    }
    if (channel < 0 || channel >= eff.out_shape.channels()) {
        throw BoundsError("effort map channel " + std::to_string(channel) + " out of range");
    }
    EffortMap map;
    map.layer = layer;
    map.channel = channel;
    map.height = eff.out_shape.height();
    map.width = eff.out_shape.width();
    map.grid.resize(static_cast<std::size_t>(map.height) * map.width);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            const NeuronOutcome& o = eff.at(channel, r, c);
            map.grid[static_cast<std::size_t>(r) * map.width + c] =
                o.ops_baseline ? static_cast<float>(static_cast<double>(o.ops_spent) /
                                                    static_cast<double>(o.ops_baseline))
                               : 1.0f;
        }
    }
    return map;
}

void export_effort_map(const EffortMap& map, const std::string& path, EffortMapFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    if (format == EffortMapFormat::Pgm) {
        os << "P5\n" << map.width << " " << map.height << "\n255\n";
        for (float v : map.grid) {
            const int pixel = static_cast<int>(std::lround(255.0 * (1.0 - static_cast<double>(v))));
            os.put(static_cast<char>(std::clamp(pixel, 0, 255)));
        }
    } else {
        char buf[32];
        for (int r = 0; r < map.height; ++r) {
            for (int c = 0; c < map.width; ++c) {
                std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(map.at(r, c)));
                os << (c ? "," : "") << buf;
            }
            os << "\n";
        }
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

EffortMap import_effort_map_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    EffortMap map;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ss, cell, ',')) {
            map.grid.push_back(std::strtof(cell.c_str(), nullptr));
            ++cols;
        }
        if (map.width == 0) {
            map.width = cols;
        } else if (cols != map.width) {
            throw ValidationError("ragged effort map CSV");
        }
        ++map.height;
    }
    return map;
}

std::string run_report_to_json(const RunReport& report, const std::string& manifest_json) {
    using nlohmann::json;
    json j;
    j["baseline_ops"] = report.baseline_ops;
    j["dyve_ops"] = report.dyve_ops;
    j["overhead_ops"] = report.overhead_ops;
    j["reduction_ratio"] = report.reduction;
    j["accuracy_baseline"] = report.accuracy_baseline;
    j["accuracy_dyve"] = report.accuracy_dyve;

    const KnobAttribution attr = knob_attribution(report.dyve_counters);
    j["per_knob"] = {{"spet", attr.spet}, {"sdss", attr.sdss}, {"sfma", attr.sfma}};

    json layers = json::array();
    for (std::size_t i = 0; i < report.dyve_counters.layers.size(); ++i) {
        const LayerOps& l = report.dyve_counters.layers[i];
        json e;
        e["layer"] = i;
        if (i < report.layer_names.size()) e["kind"] = report.layer_names[i];
        e["baseline_ops"] = l.baseline_ops;
        e["spent_ops"] = l.spent();
        e["overhead_ops"] = l.overhead_ops;
        e["saved"] = {{"spet", l.saved_spet}, {"sdss", l.saved_sdss}, {"sfma", l.saved_sfma}};
        layers.push_back(e);
    }
    j["per_layer"] = layers;
    j["wallclock_informational"] = {{"baseline_s", report.wallclock_baseline_s},
                                    {"dyve_s", report.wallclock_dyve_s}};
    if (!manifest_json.empty()) j["manifest"] = json::parse(manifest_json);
    return j.dump(2);
}

}  // namespace dyve
