#pragma once

#include <string>

#include "dyve/model.hpp"

namespace dyve {

/// Model file format (.dyve):
///   magic "DYVE" | version byte 1 | u32-le manifest length |
///   UTF-8 JSON manifest | raw little-endian f32 blob.
/// The manifest lists layer specs, input shape, class count and named
/// tensor entries with element offsets/lengths into the blob. Weights
/// round-trip bit-exactly, including the precomputed kernel sums.
void save_model(const Network& net, const std::string& path);

Network load_model(const std::string& path);

}  // namespace dyve
