#include "dyve/effort_knobs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dyve {

std::vector<int> rearrange_odd_even(int n) {
    std::vector<int> perm;
    perm.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; i += 2) perm.push_back(i);
    for (int i = 1; i < n; i += 2) perm.push_back(i);
    return perm;
}

SpetResult spet_dot(std::span<const float> inputs, std::span<const float> weights, float bias,
                    const LayerKnobs& cfg, LayerOps& ops, int check_after) {
    if (inputs.size() != weights.size() || inputs.empty()) {
        throw ValidationError("spet_dot input/weight lengths must match and be >= 1");
    }
    const int n = static_cast<int>(inputs.size());
    if (check_after < 0) {
        check_after = static_cast<int>(
            std::ceil(static_cast<double>(cfg.prediction_fraction) * static_cast<double>(n)));
    }
    check_after = std::clamp(check_after, 1, n);

    SpetResult res;
    double acc = bias;
    int i = 0;
    for (; i < check_after; ++i) {
        acc += static_cast<double>(weights[i]) * static_cast<double>(inputs[i]);
    }
    ops.multiplies += static_cast<std::uint64_t>(check_after);
    ops.adds += static_cast<std::uint64_t>(check_after);

    ops.overhead_ops += 1;  // low-threshold comparison
    if (acc < static_cast<double>(cfg.spet_l_thresh)) {
        res.terminated = true;
        // Representative clamped into the ReLU saturation regime so the
        // downstream activation yields the saturated output.
        res.pre_activation = std::min(cfg.spet_l_thresh, 0.0f);
        res.processed = i;
        return res;
    }
    if (cfg.spet_u_thresh) {
        ops.overhead_ops += 1;
        if (acc > static_cast<double>(*cfg.spet_u_thresh)) {
            res.terminated = true;
            res.saturated_high = true;
            res.pre_activation = *cfg.spet_u_thresh;
            res.processed = i;
            return res;
        }
    }
    for (; i < n; ++i) {
        acc += static_cast<double>(weights[i]) * static_cast<double>(inputs[i]);
    }
    ops.multiplies += static_cast<std::uint64_t>(n - check_after);
    ops.adds += static_cast<std::uint64_t>(n - check_after);
    res.pre_activation = static_cast<float>(acc);
    res.processed = n;
    return res;
}

SdssSchedule sdss_schedule(int h, int w, int sp) {
    if (h < 1 || w < 1 || sp < 1) throw ConfigError("sdss_schedule dims and sp must be >= 1");
    SdssSchedule s;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (r % sp == 0 && c % sp == 0) {
                s.sampled.emplace_back(r, c);
            } else {
                s.deferred.emplace_back(r, c);
            }
        }
    }
    return s;
}

SdssDecision sdss_decide(std::span<const float> neighbors, const LayerKnobs& cfg, LayerOps& ops) {
    SdssDecision d;
    if (neighbors.size() < 2) return d;  // too little context: compute exactly, nothing charged
    float mx = neighbors[0];
    float mn = neighbors[0];
    for (std::size_t i = 1; i < neighbors.size(); ++i) {
        if (neighbors[i] > mx) mx = neighbors[i];
        if (neighbors[i] < mn) mn = neighbors[i];
    }
    // max and min scans, then the two threshold gates
    ops.overhead_ops += 2ull * (neighbors.size() - 1) + 2;
    const float range = static_cast<float>(static_cast<double>(mx) - static_cast<double>(mn));
    if (mx < cfg.max_act_thresh && range < cfg.del_act_thresh) {
        double sum = 0.0;
        for (float v : neighbors) sum += v;
        d.approximate = true;
        d.value = static_cast<float>(sum / static_cast<double>(neighbors.size()));
        // averaging: n-1 adds + 1 divide
        ops.overhead_ops += neighbors.size();
    }
    return d;
}

std::vector<Region> region_partition(int h, int w, int k, int region_size) {
    if (k < 1) throw ConfigError("kernel must be >= 1");
    if (region_size <= k) throw ConfigError("region_size must exceed the kernel size");
    const auto starts = [&](int extent) {
        std::vector<int> out{0};
        const int step = region_size - k;
        while (out.back() + region_size < extent) out.push_back(out.back() + step);
        return out;
    };
    std::vector<Region> regions;
    for (int r0 : starts(h)) {
        for (int c0 : starts(w)) {
            Region reg;
            reg.r0 = r0;
            reg.c0 = c0;
            reg.r1 = std::min(r0 + region_size, h) - 1;
            reg.c1 = std::min(c0 + region_size, w) - 1;
            regions.push_back(reg);
        }
    }
    return regions;
}

int sfma_region_size(int k) { return std::max(2 * k, 8); }

float sfma_contribution(float mu, float kernel_sum, LayerOps& ops) {
    ops.multiplies += 1;
    return static_cast<float>(static_cast<double>(mu) * static_cast<double>(kernel_sum));
}

SfmaScreen::SfmaScreen(const LayerSpec& layer, const ConvWeights& weights, const LayerKnobs& cfg, int layer_index)
    : layer_(layer), weights_(weights), cfg_(cfg), layer_index_(layer_index) {
    enabled_ = cfg.sfma_enabled && layer.kind == LayerKind::Conv;
    if (!enabled_) return;
    bound_.assign(static_cast<std::size_t>(layer.in_channels), 0);
    stats_.resize(static_cast<std::size_t>(layer.in_channels));
    var_pass_.resize(static_cast<std::size_t>(layer.in_channels));
    wsig_cache_.assign(static_cast<std::size_t>(layer.out_channels) * layer.in_channels, -1);
}

void SfmaScreen::bind_channel(int in_channel, const float* grid, int h, int w, LayerOps& ops) {
    if (!enabled_) return;
    if (regions_.empty()) {
        h_ = h;
        w_ = w;
        regions_ = region_partition(h, w, layer_.kernel, sfma_region_size(layer_.kernel));
    }
    auto& stats = stats_[static_cast<std::size_t>(in_channel)];
    auto& pass = var_pass_[static_cast<std::size_t>(in_channel)];
    stats.clear();
    pass.clear();
    for (const Region& reg : regions_) {
        const RegionStats s = region_stats(grid, w, reg.r0, reg.c0, reg.r1, reg.c1);
        // one pass: an add per element plus the two divisions
        ops.overhead_ops += reg.elements() + 2;
        // variance gate, charged once per (channel, region)
        ops.overhead_ops += 1;
        stats.push_back(s);
        pass.push_back(s.variance < cfg_.fea_var_thresh ? 1 : 0);
    }
    bound_[static_cast<std::size_t>(in_channel)] = 1;
}

bool SfmaScreen::wsig_pass(int in_channel, int out_channel, LayerOps& ops) {
    const std::size_t idx = static_cast<std::size_t>(out_channel) * layer_.in_channels + in_channel;
    if (wsig_cache_[idx] < 0) {
        ops.overhead_ops += 1;
        wsig_cache_[idx] = weights_.kernel_abs_sum[idx] < cfg_.wsig_thresh ? 1 : 0;
    }
    return wsig_cache_[idx] == 1;
}

std::vector<SfmaDecision> SfmaScreen::screen(int in_channel, int out_channel, LayerOps& ops) {
    std::vector<SfmaDecision> out;
    if (!enabled_ || !bound_[static_cast<std::size_t>(in_channel)]) return out;
    const bool wsig_ok = wsig_pass(in_channel, out_channel, ops);
    const std::size_t slice = static_cast<std::size_t>(out_channel) * layer_.in_channels + in_channel;
    const auto& stats = stats_[static_cast<std::size_t>(in_channel)];
    const auto& pass = var_pass_[static_cast<std::size_t>(in_channel)];
    out.reserve(regions_.size());
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        SfmaDecision d;
        d.layer = layer_index_;
        d.in_channel = in_channel;
        d.out_channel = out_channel;
        d.region = regions_[i];
        d.mu = stats[i].mean;
        d.kernel_sum = weights_.kernel_sum[slice];
        d.approximate = wsig_ok && pass[i] == 1;
        out.push_back(d);
    }
    return out;
}

std::pair<bool, float> SfmaScreen::window_approximation(int in_channel, int out_channel, int r, int c) const {
    if (!enabled_) return {false, 0.0f};
    const std::size_t idx = static_cast<std::size_t>(out_channel) * layer_.in_channels + in_channel;
    if (wsig_cache_[idx] != 1) return {false, 0.0f};
    const float mu = window_region_mean(in_channel, r, c);
    if (std::isnan(mu)) return {false, 0.0f};
    return {true, mu};
}

float SfmaScreen::window_region_mean(int in_channel, int r, int c) const {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    if (!enabled_ || !bound_[static_cast<std::size_t>(in_channel)]) return nan;
    if (r < 0 || c < 0 || r + layer_.kernel > h_ || c + layer_.kernel > w_) return nan;
    const auto& stats = stats_[static_cast<std::size_t>(in_channel)];
    const auto& pass = var_pass_[static_cast<std::size_t>(in_channel)];
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        if (pass[i] == 1 && regions_[i].contains_window(r, c, layer_.kernel)) {
            return stats[i].mean;
        }
    }
    return nan;
}

}  // namespace dyve
