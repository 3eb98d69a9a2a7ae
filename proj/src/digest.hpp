#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace edet {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);

} // namespace edet
