#pragma once

#include <cstdint>
#include <vector>

namespace dyve {

/// Scalar-operation tallies for one layer.
///
/// Counting convention: dot-product multiplies/adds (conv and FC, padded
/// positions included) and max-pool comparisons are "useful" work; ReLU
/// and softmax are uniform in both engines and uncounted. Knob bookkeeping
/// (threshold comparisons, region statistics, neighbor averaging) goes to
/// overhead_ops and never hides inside the useful tallies.
///
/// baseline_ops is what a knob-free pass would spend on the layer; the
/// saved_* fields attribute skipped work per knob. Per layer, exactly:
///   baseline_ops == spent() + saved_spet + saved_sdss + saved_sfma.
struct LayerOps {
    std::uint64_t multiplies = 0;
    std::uint64_t adds = 0;
    std::uint64_t compares = 0;
    std::uint64_t overhead_ops = 0;
    std::uint64_t baseline_ops = 0;
    std::uint64_t saved_spet = 0;
    std::uint64_t saved_sdss = 0;
    std::uint64_t saved_sfma = 0;

    std::uint64_t spent() const { return multiplies + adds + compares; }
    std::uint64_t saved() const { return saved_spet + saved_sdss + saved_sfma; }

    LayerOps& operator+=(const LayerOps& other) {
        multiplies += other.multiplies;
        adds += other.adds;
        compares += other.compares;
        overhead_ops += other.overhead_ops;
        baseline_ops += other.baseline_ops;
        saved_spet += other.saved_spet;
        saved_sdss += other.saved_sdss;
        saved_sfma += other.saved_sfma;
        return *this;
    }
};

/// Per-layer tallies for one or more inferences. Merging across
/// inferences is commutative summation.
struct OpCounters {
    std::vector<LayerOps> layers;

    OpCounters() = default;
    explicit OpCounters(std::size_t layer_count) : layers(layer_count) {}

    LayerOps& layer(int i) { return layers[static_cast<std::size_t>(i)]; }
    const LayerOps& layer(int i) const { return layers[static_cast<std::size_t>(i)]; }

    std::uint64_t total_spent() const {
        std::uint64_t n = 0;
        for (const LayerOps& l : layers) n += l.spent();
        return n;
    }
    std::uint64_t total_overhead() const {
        std::uint64_t n = 0;
        for (const LayerOps& l : layers) n += l.overhead_ops;
        return n;
    }
    std::uint64_t total_baseline() const {
        std::uint64_t n = 0;
        for (const LayerOps& l : layers) n += l.baseline_ops;
        return n;
    }

    OpCounters& operator+=(const OpCounters& other) {
        if (layers.size() < other.layers.size()) layers.resize(other.layers.size());
        for (std::size_t i = 0; i < other.layers.size(); ++i) layers[i] += other.layers[i];
        return *this;
    }
};

}  // namespace dyve
