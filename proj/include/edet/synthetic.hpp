#pragma once

#include <cstdint>
#include <vector>

#include "edet/csv.hpp"

namespace edet {

/// Column layout of generated traffic: ten numeric features, the protocol
/// state column, and the trailing label.
Schema synthetic_schema();

/// Desk-scale labeled traffic with class-separated feature distributions.
/// Packets arrive in alternating bursts of one class, mean burst length 32.
/// The attack count is exactly round(n_packets * attack_fraction); `spread`
/// scales the class-conditional noise, so larger values blur the classes.
std::vector<PacketRecord> generate_synthetic(std::size_t n_packets, double attack_fraction,
                                             std::uint64_t seed, double spread = 1.0);

} // namespace edet
