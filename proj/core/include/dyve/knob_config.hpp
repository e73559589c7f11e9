#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyve/errors.hpp"

namespace dyve {

/// Effort-knob hyper-parameters for one layer. All neurons of the layer
/// share the same values. Thresholds are on raw (pre-activation) values.
struct LayerKnobs {
    bool spet_enabled = false;
    float spet_l_thresh = 0.0f;
    std::optional<float> spet_u_thresh;  // absent for ReLU-only networks
    float prediction_fraction = 0.5f;    // fraction of inputs before the check

    bool sdss_enabled = false;
    int sp = 2;  // sampling period per spatial dimension
    float max_act_thresh = 0.0f;
    float del_act_thresh = 0.0f;

    bool sfma_enabled = false;
    float wsig_thresh = 0.0f;
    float fea_var_thresh = 0.0f;

    void validate() const {
        if (sp < 1) throw ConfigError("sp must be >= 1");
        if (!(prediction_fraction > 0.0f && prediction_fraction < 1.0f)) {
            throw ConfigError("prediction_fraction must lie in (0,1)");
        }
        if (max_act_thresh < 0.0f || del_act_thresh < 0.0f || wsig_thresh < 0.0f || fea_var_thresh < 0.0f) {
            throw ConfigError("magnitude/variance thresholds must be >= 0");
        }
    }

    bool any_enabled() const { return spet_enabled || sdss_enabled || sfma_enabled; }
};

/// One entry per network layer; entries for non-knob layers stay inert.
struct KnobConfig {
    std::vector<LayerKnobs> layers;

    KnobConfig() = default;
    explicit KnobConfig(std::size_t layer_count) : layers(layer_count) {}

    LayerKnobs& layer(int i) { return layers[static_cast<std::size_t>(i)]; }
    const LayerKnobs& layer(int i) const { return layers[static_cast<std::size_t>(i)]; }

    void validate() const {
        for (const LayerKnobs& l : layers) l.validate();
    }
};

/// JSON wire format: a top-level array indexed by layer; absent fields
/// mean the knob is disabled for that layer.
std::string knob_config_to_json(const KnobConfig& cfg);
KnobConfig knob_config_from_json(const std::string& text);

void save_knob_config(const KnobConfig& cfg, const std::string& path);
KnobConfig load_knob_config(const std::string& path);

}  // namespace dyve
