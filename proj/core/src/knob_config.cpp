#include "dyve/knob_config.hpp"

#include <fstream>

#include "json.hpp"

namespace dyve {

namespace {
using nlohmann::json;
}

std::string knob_config_to_json(const KnobConfig& cfg) {
    json arr = json::array();
    for (const LayerKnobs& l : cfg.layers) {
        json j = json::object();
        if (l.spet_enabled) {
            j["spet_enabled"] = true;
            j["spet_l_thresh"] = l.spet_l_thresh;
            if (l.spet_u_thresh) j["spet_u_thresh"] = *l.spet_u_thresh;
            j["prediction_fraction"] = l.prediction_fraction;
        }
        if (l.sdss_enabled) {
            j["sdss_enabled"] = true;
            j["sp"] = l.sp;
            j["max_act_thresh"] = l.max_act_thresh;
            j["del_act_thresh"] = l.del_act_thresh;
        }
        if (l.sfma_enabled) {
            j["sfma_enabled"] = true;
            j["wsig_thresh"] = l.wsig_thresh;
            j["fea_var_thresh"] = l.fea_var_thresh;
        }
        arr.push_back(j);
    }
    return arr.dump(2);
}

KnobConfig knob_config_from_json(const std::string& text) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("knob config parse: ") + e.what());
    }
    if (!arr.is_array()) throw ConfigError("knob config must be a top-level array indexed by layer");
    KnobConfig cfg(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& j = arr[i];
        if (!j.is_object()) throw ConfigError("knob config entry " + std::to_string(i) + " must be an object");
        LayerKnobs& l = cfg.layers[i];
        try {
            l.spet_enabled = j.value("spet_enabled", j.contains("spet_l_thresh"));
            if (j.contains("spet_l_thresh")) l.spet_l_thresh = j["spet_l_thresh"].get<float>();
            if (j.contains("spet_u_thresh")) l.spet_u_thresh = j["spet_u_thresh"].get<float>();
            if (j.contains("prediction_fraction")) l.prediction_fraction = j["prediction_fraction"].get<float>();

            l.sdss_enabled = j.value("sdss_enabled", j.contains("max_act_thresh") || j.contains("del_act_thresh"));
            if (j.contains("sp")) l.sp = j["sp"].get<int>();
            if (j.contains("max_act_thresh")) l.max_act_thresh = j["max_act_thresh"].get<float>();
            if (j.contains("del_act_thresh")) l.del_act_thresh = j["del_act_thresh"].get<float>();

            l.sfma_enabled = j.value("sfma_enabled", j.contains("wsig_thresh") || j.contains("fea_var_thresh"));
            if (j.contains("wsig_thresh")) l.wsig_thresh = j["wsig_thresh"].get<float>();
            if (j.contains("fea_var_thresh")) l.fea_var_thresh = j["fea_var_thresh"].get<float>();
        } catch (const json::exception& e) {
            throw ConfigError("knob config entry " + std::to_string(i) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

void save_knob_config(const KnobConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << knob_config_to_json(cfg) << "\n";
    if (!os) throw IoError("write failed for '" + path + "'");
}

KnobConfig load_knob_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return knob_config_from_json(text);
}

}  // namespace dyve
