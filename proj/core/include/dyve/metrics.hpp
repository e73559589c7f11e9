#pragma once

#include <string>
#include <vector>

#include "dyve/dyve_engine.hpp"
#include "dyve/op_counters.hpp"

namespace dyve {

/// Baseline useful work divided by variable-effort work including the
/// knob bookkeeping overhead. Both counter sets must come from the same
/// inputs and network.
double reduction_ratio(const OpCounters& baseline, const OpCounters& dyve_run);

struct KnobAttribution {
    std::uint64_t spet = 0;
    std::uint64_t sdss = 0;
    std::uint64_t sfma = 0;
    std::uint64_t total() const { return spet + sdss + sfma; }
};

/// Saved-op credit per knob, summed over layers. Equals
/// baseline - spent exactly (conservation).
KnobAttribution knob_attribution(const OpCounters& dyve_run);

/// Fraction of zero post-ReLU activations for each conv layer (the conv
/// layer's index paired with the fraction measured on its following ReLU).
struct SaturationProfile {
    std::vector<int> conv_layers;
    std::vector<double> zero_fraction;
};
SaturationProfile saturation_profile(const Network& net, const std::vector<Tensor>& inputs);

/// For each prediction interval: among neurons predicted to saturate
/// (partial sum below zero at the check point), the fraction whose exact
/// pre-activation is <= 0. Computed per conv layer on exact traces, plus
/// the aggregate over all conv layers. An interval with no predictions
/// counts as 1.0.
struct PredictionAccuracyProfile {
    std::vector<double> intervals;
    std::vector<int> conv_layers;
    std::vector<std::vector<double>> per_layer;  // [conv layer][interval]
    std::vector<double> aggregate;               // [interval]
};
PredictionAccuracyProfile prediction_accuracy_profile(const Network& net,
                                                      const std::vector<Tensor>& inputs,
                                                      const std::vector<double>& intervals);

/// Per-neuron normalized effort for one feature map: ops spent over ops a
/// knob-free evaluation would spend, in [0,1], 1 where knobs changed nothing.
struct EffortMap {
    int layer = 0;
    int channel = 0;
    int height = 0;
    int width = 0;
    std::vector<float> grid;  // row-major

    float at(int r, int c) const { return grid[static_cast<std::size_t>(r) * width + c]; }
};

EffortMap effort_map_from_trace(const DyveTrace& trace, int layer, int channel);

enum class EffortMapFormat { Pgm, Csv };

/// PGM (P5) writes round(255*(1-effort)) so heavier computation renders
/// darker; CSV writes raw ratios and round-trips bit-exactly.
void export_effort_map(const EffortMap& map, const std::string& path, EffortMapFormat format);

EffortMap import_effort_map_csv(const std::string& path);

/// Run report shared by the CLI subcommands.
struct RunReport {
    std::uint64_t baseline_ops = 0;
    std::uint64_t dyve_ops = 0;
    std::uint64_t overhead_ops = 0;
    double reduction = 0.0;
    double accuracy_baseline = 0.0;
    double accuracy_dyve = 0.0;
    OpCounters baseline_counters;
    OpCounters dyve_counters;
    std::vector<std::string> layer_names;
    double wallclock_baseline_s = 0.0;  // informational
    double wallclock_dyve_s = 0.0;      // informational
};

std::string run_report_to_json(const RunReport& report, const std::string& manifest_json);

}  // namespace dyve
