#include "dyve/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace dyve {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'D', 'Y', 'V', 'E'};
constexpr std::uint8_t kVersion = 1;

struct TensorEntry {
    std::string name;
    const std::vector<float>* data;
};

std::vector<TensorEntry> tensor_entries(const Network& net) {
    std::vector<TensorEntry> entries;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& s = net.layers[i];
        const std::string prefix = layer_kind_name(s.kind) + std::to_string(i);
        if (s.kind == LayerKind::Conv) {
            const ConvWeights& w = net.weights.conv[i];
            entries.push_back({prefix + ".kernel", &w.kernel});
            entries.push_back({prefix + ".bias", &w.bias});
            entries.push_back({prefix + ".kernel_sum", &w.kernel_sum});
            entries.push_back({prefix + ".kernel_abs_sum", &w.kernel_abs_sum});
        } else if (s.kind == LayerKind::FullyConnected) {
            const FcWeights& w = net.weights.fc[i];
            entries.push_back({prefix + ".weight", &w.weight});
            entries.push_back({prefix + ".bias", &w.bias});
        }
    }
    return entries;
}

json layer_to_json(const LayerSpec& s) {
    json j;
    j["kind"] = layer_kind_name(s.kind);
    switch (s.kind) {
        case LayerKind::Conv:
            j["in_channels"] = s.in_channels;
            j["out_channels"] = s.out_channels;
            j["kernel"] = s.kernel;
            j["stride"] = s.stride;
            j["pad"] = s.pad;
            break;
        case LayerKind::FullyConnected:
            j["in_features"] = s.in_features;
            j["out_features"] = s.out_features;
            break;
        case LayerKind::MaxPool:
            j["window"] = s.window;
            j["stride"] = s.pool_stride;
            break;
        default:
            break;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    const LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
        case LayerKind::Conv:
            return conv_layer(j.at("in_channels").get<int>(), j.at("out_channels").get<int>(),
                              j.at("kernel").get<int>(), j.at("stride").get<int>(), j.at("pad").get<int>());
        case LayerKind::FullyConnected:
            return fc_layer(j.at("in_features").get<int>(), j.at("out_features").get<int>());
        case LayerKind::MaxPool:
            return maxpool_layer(j.at("window").get<int>(), j.at("stride").get<int>());
        case LayerKind::ReLU:
            return relu_layer();
        case LayerKind::Softmax:
            return softmax_layer();
    }
    throw FormatError(FormatErrorCode::BadManifest, "unreachable layer kind");
}

void write_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError(FormatErrorCode::TruncatedBlob, "file ends inside header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_model(const Network& net, const std::string& path) {
    validate_network(net);

    const std::vector<TensorEntry> entries = tensor_entries(net);
    json manifest;
    manifest["input_shape"] = net.input_shape.dims;
    manifest["class_count"] = net.class_count;
    json layers = json::array();
    for (const LayerSpec& s : net.layers) layers.push_back(layer_to_json(s));
    manifest["layers"] = layers;

    json tensors = json::array();
    std::uint64_t offset = 0;  // element offset into the f32 blob
    for (const TensorEntry& e : entries) {
        json t;
        t["name"] = e.name;
        t["offset"] = offset;
        t["length"] = e.data->size();
        tensors.push_back(t);
        offset += e.data->size();
    }
    manifest["tensors"] = tensors;

    const std::string manifest_text = manifest.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    write_u32le(os, static_cast<std::uint32_t>(manifest_text.size()));
    os.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
    for (const TensorEntry& e : entries) {
        os.write(reinterpret_cast<const char*>(e.data->data()),
                 static_cast<std::streamsize>(e.data->size() * sizeof(float)));
    }
    if (!os) throw IoError("write failed for '" + path + "'");
}

Network load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "'");

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError(FormatErrorCode::BadMagic, "'" + path + "' is not a model file");
    }
    const int version = is.get();
    if (version != kVersion) {
        throw FormatError(FormatErrorCode::BadVersion,
                          "unsupported model version " + std::to_string(version));
    }
    const std::uint32_t manifest_len = read_u32le(is);
    std::string manifest_text(manifest_len, '\0');
    is.read(manifest_text.data(), manifest_len);
    if (!is) throw FormatError(FormatErrorCode::TruncatedBlob, "file ends inside manifest");

    json manifest;
    try {
        manifest = json::parse(manifest_text);
    } catch (const json::exception& e) {
        throw FormatError(FormatErrorCode::BadManifest, std::string("manifest parse: ") + e.what());
    }

    Network net;
    try {
        net.input_shape.dims = manifest.at("input_shape").get<std::vector<int>>();
        net.class_count = manifest.at("class_count").get<int>();
        for (const json& j : manifest.at("layers")) net.layers.push_back(layer_from_json(j));
    } catch (const json::exception& e) {
        throw FormatError(FormatErrorCode::BadManifest, std::string("manifest fields: ") + e.what());
    }
    allocate_weights(net);

    // Blob: read sequentially, checking the declared entries against the
    // storage allocated from the layer specs.
    std::vector<TensorEntry> entries = tensor_entries(net);
    std::size_t entry_index = 0;
    std::uint64_t expect_offset = 0;
    try {
        for (const json& t : manifest.at("tensors")) {
            if (entry_index >= entries.size()) {
                throw FormatError(FormatErrorCode::BadManifest, "more tensor entries than layer storage");
            }
            const TensorEntry& e = entries[entry_index];
            if (t.at("name").get<std::string>() != e.name) {
                throw FormatError(FormatErrorCode::BadManifest,
                                  "tensor entry '" + t.at("name").get<std::string>() + "' does not match expected '" +
                                      e.name + "'");
            }
            if (t.at("offset").get<std::uint64_t>() != expect_offset ||
                t.at("length").get<std::uint64_t>() != e.data->size()) {
                throw FormatError(FormatErrorCode::BadManifest, "tensor entry '" + e.name + "' offset/length mismatch");
            }
            auto* dst = const_cast<std::vector<float>*>(e.data);
            is.read(reinterpret_cast<char*>(dst->data()), static_cast<std::streamsize>(dst->size() * sizeof(float)));
            if (static_cast<std::size_t>(is.gcount()) != dst->size() * sizeof(float)) {
                throw FormatError(FormatErrorCode::TruncatedBlob,
                                  "blob ends inside tensor '" + e.name + "'");
            }
            expect_offset += dst->size();
            ++entry_index;
        }
    } catch (const json::exception& e) {
        throw FormatError(FormatErrorCode::BadManifest, std::string("tensor entries: ") + e.what());
    }
    if (entry_index != entries.size()) {
        throw FormatError(FormatErrorCode::BadManifest, "manifest declares fewer tensors than the layers require");
    }

    validate_network(net);
    return net;
}

}  // namespace dyve
