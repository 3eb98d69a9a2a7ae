#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>

#include "edet/features.hpp"
#include "edet/model.hpp"

namespace edet {

struct StreamCounters {
    std::uint64_t packets_seen = 0; // well-formed packets consumed
    std::uint64_t malformed_skipped = 0;
    std::uint64_t windows_classified = 0;
    std::uint64_t attacks_flagged = 0;
    std::uint64_t unknown_categories = 0;
};

/// Packet-at-a-time sliding-window detector. Keeps only the last T encoded
/// vectors, so memory stays O(T x width) however long the stream runs; the
/// first verdict appears once T packets have arrived, then one per packet.
class StreamDetector {
public:
    /// Refuses with DigestMismatch when the model carries a feature-spec
    /// digest that differs from the encoder's; untagged models (all-zero
    /// digest) skip the check.
    StreamDetector(const ModelParams& model, const FeatureEncoder& enc, int T);

    std::optional<Prediction> push(const PacketRecord& rec);

    StreamCounters counters() const;
    int window_len() const { return T_; }

private:
    const ModelParams& model_;
    const FeatureEncoder& enc_;
    int T_;
    Mat ring_;
    int next_ = 0;
    int filled_ = 0;
    StreamCounters counters_;
};

/// Reads packet rows, feeds the detector, and writes one JSON object per
/// verdict: {"index": i, "p_attack": x, "verdict": "attack"|"normal"}.
/// Malformed rows are skipped with a warning line and counted; the stream
/// never dies on bad input.
StreamCounters detect_stream(std::istream& in, const Schema& schema, StreamDetector& det,
                             std::ostream& out, std::ostream* warnings);

} // namespace edet
