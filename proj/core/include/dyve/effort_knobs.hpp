#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dyve/knob_config.hpp"
#include "dyve/model.hpp"
#include "dyve/op_counters.hpp"
#include "dyve/tensor.hpp"

namespace dyve {

/// Permutation placing 0-based even indices (1-based odd positions)
/// first, then the rest, each group in original relative order.
/// n=5 -> [0,2,4,1,3]. Fixed bijection, precomputable per layer.
std::vector<int> rearrange_odd_even(int n);

struct SpetResult {
    float pre_activation = 0.0f;
    bool terminated = false;
    bool saturated_high = false;
    int processed = 0;  // inputs consumed (prefix length on termination)
};

/// Partial-sum saturation check over sequences already in rearranged
/// order. Accumulates the bias, then the first check_after products
/// (default ceil(prediction_fraction*n)); terminates early when the
/// partial sum crosses a threshold, otherwise finishes exactly. The
/// low-saturation representative is clamped so a downstream ReLU yields
/// the saturated value. One comparison per configured threshold is
/// charged as knob overhead.
SpetResult spet_dot(std::span<const float> inputs, std::span<const float> weights, float bias,
                    const LayerKnobs& cfg, LayerOps& ops, int check_after = -1);

/// Uniform sampling grid: sampled = {(r,c): r%sp==0 && c%sp==0},
/// deferred = remaining positions in row-major order.
struct SdssSchedule {
    std::vector<std::pair<int, int>> sampled;
    std::vector<std::pair<int, int>> deferred;
};
SdssSchedule sdss_schedule(int h, int w, int sp);

struct SdssDecision {
    bool approximate = false;
    float value = 0.0f;  // neighbor average when approximating
};

/// Two-predicate gate over already-computed neighbor values: approximate
/// with the neighbor average iff max < max_act_thresh and range <
/// del_act_thresh. Fewer than two neighbors always computes exactly.
/// Neighbor max/min scans and the two threshold comparisons are charged
/// as overhead; the averaging cost is charged by the caller on use.
SdssDecision sdss_decide(std::span<const float> neighbors, const LayerKnobs& cfg, LayerOps& ops);

/// Axis-aligned region of a feature, inclusive bounds.
struct Region {
    int r0 = 0, c0 = 0, r1 = 0, c1 = 0;
    int rows() const { return r1 - r0 + 1; }
    int cols() const { return c1 - c0 + 1; }
    std::uint64_t elements() const { return static_cast<std::uint64_t>(rows()) * cols(); }
    bool contains_window(int r, int c, int k) const {
        return r >= r0 && c >= c0 && r + k - 1 <= r1 && c + k - 1 <= c1;
    }
};

/// Tiles of side region_size stepping by region_size - k so adjacent
/// tiles overlap by the kernel size on each dimension; the final tile is
/// clamped at the border. Every k x k window inside the feature lies
/// fully inside at least one tile.
std::vector<Region> region_partition(int h, int w, int k, int region_size);

/// Default tile side; features no larger than this use whole-feature
/// variance.
int sfma_region_size(int k);

struct SfmaDecision {
    int layer = 0;
    int in_channel = 0;
    int out_channel = 0;
    Region region;
    bool approximate = false;
    float mu = 0.0f;          // region mean of the input feature
    float kernel_sum = 0.0f;  // precomputed slice sum
};

/// Grouped window contribution mu * sum(w); charges exactly one multiply
/// (and the caller one add) in place of the k*k products.
float sfma_contribution(float mu, float kernel_sum, LayerOps& ops);

/// Per-layer screening state. Region statistics are computed once per
/// (input channel, region) and shared by every output channel; the
/// weight-significance comparison is charged once per kernel slice.
class SfmaScreen {
public:
    /// feature_h/w are the conv layer's input spatial dims; grids are
    /// bound later, one per input channel.
    SfmaScreen(const LayerSpec& layer, const ConvWeights& weights, const LayerKnobs& cfg, int layer_index);

    /// Runs the variance pass for one input channel grid (charged:
    /// one add per element + 2 multiplies per region).
    void bind_channel(int in_channel, const float* grid, int h, int w, LayerOps& ops);

    /// Decisions for one (in_channel, out_channel) pair, one per region.
    std::vector<SfmaDecision> screen(int in_channel, int out_channel, LayerOps& ops);

    /// True plus the region mean when the window with top-left input
    /// coordinate (r,c) sits fully inside a qualifying region.
    std::pair<bool, float> window_approximation(int in_channel, int out_channel, int r, int c) const;

    /// Mean of the first variance-passing region fully containing the
    /// window at (r,c), NaN when none does. The weight-significance gate
    /// is per kernel slice and applied by the caller.
    float window_region_mean(int in_channel, int r, int c) const;

    bool enabled() const { return enabled_; }
    const std::vector<Region>& regions() const { return regions_; }

private:
    bool wsig_pass(int in_channel, int out_channel, LayerOps& ops);

    const LayerSpec& layer_;
    const ConvWeights& weights_;
    const LayerKnobs& cfg_;
    int layer_index_ = 0;
    bool enabled_ = false;
    int h_ = 0, w_ = 0;
    std::vector<Region> regions_;
    std::vector<std::vector<RegionStats>> stats_;     // [in_channel][region]
    std::vector<std::vector<std::uint8_t>> var_pass_; // [in_channel][region]
    std::vector<std::uint8_t> bound_;                 // [in_channel]
    std::vector<std::int8_t> wsig_cache_;             // [out*in]: -1 unknown, else 0/1
};

}  // namespace dyve
