#pragma once

#include <span>
#include <string>

#include "fz/types.hpp"

namespace fz {

// FZFM1 binary dump: magic "FZFM1", u8 rank, rank x u32 dims (little
// endian), then float32 values row-major. Feature maps serialize as
// (channels, height, width), flow fields as (height, width, 2) and
// scalar maps as (height, width).

std::vector<uint8_t> serialize_feature_map(const FeatureMap& fm);
std::vector<uint8_t> serialize_flow_field(const FlowField& flow);
std::vector<uint8_t> serialize_scalar_map(const ScalarMap& map);

FeatureMap parse_feature_map(std::span<const uint8_t> bytes);
FlowField parse_flow_field(std::span<const uint8_t> bytes);
ScalarMap parse_scalar_map(std::span<const uint8_t> bytes);

void save_bytes(const std::string& path, std::span<const uint8_t> bytes);
std::vector<uint8_t> load_bytes(const std::string& path);

}  // namespace fz
