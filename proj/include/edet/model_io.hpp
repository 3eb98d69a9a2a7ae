#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edet/model.hpp"

namespace edet {

/// Serialized layout: magic "EDDM" | format version u32 | config block
/// (cell u8, layers u16, hidden u16, dense u16, input u16, threshold f32) |
/// feature-spec digest (32 bytes) | tensor table (count u32, then per tensor
/// name/dims/f32 data) | CRC32 of all preceding bytes. Everything
/// little-endian; tensors stored f32 and widened to f64 on load.
std::vector<std::uint8_t> serialize_model(const ModelParams& m);

ModelParams deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelParams& m, const std::string& path);
ModelParams load_model(const std::string& path);

std::size_t serialized_size_bytes(const ModelParams& m);

} // namespace edet
