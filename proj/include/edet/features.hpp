#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "edet/csv.hpp"
#include "edet/tensor.hpp"

namespace edet {

struct FeatureStats {
    double min = 0.0;
    double max = 1.0;
};

/// Training-time encoding contract: 11 selected columns of which exactly one
/// is categorical, a fixed 15-slot vocabulary for it, and min-max stats for
/// the 10 numeric features. Engineered width is always 10 + 15 = 25.
struct FeatureSpec {
    static constexpr int kVocabWidth = 15;

    std::vector<std::string> selected;
    std::string categorical;
    std::vector<std::string> vocab;
    std::vector<FeatureStats> stats; // per numeric feature, selected order minus categorical

    int numeric_count() const { return static_cast<int>(selected.size()) - 1; }
    int engineered_width() const { return numeric_count() + kVocabWidth; }
    void validate() const; // throws SpecError
};

FeatureSpec fit_feature_spec(const std::vector<PacketRecord>& records, const Schema& schema,
                             std::vector<std::string> selected, std::string categorical);

/// Canonical textual form; the digest embedded in model files is the SHA-256
/// of exactly these bytes, so cosmetic edits to a spec file do not break it
/// but semantic edits do.
std::string feature_spec_canonical_json(const FeatureSpec& spec);
std::array<std::uint8_t, 32> feature_spec_digest(const FeatureSpec& spec);

void save_feature_spec(const FeatureSpec& spec, const std::string& path);
FeatureSpec load_feature_spec(const std::string& path);

/// Immutable after construction; safe to share across threads. The only
/// mutable state is the unknown-category tally, which is atomic.
class FeatureEncoder {
public:
    FeatureEncoder(FeatureSpec spec, const Schema& schema);

    /// 25-vector: normalized numerics then the one-hot block. Unknown
    /// categories produce an all-zero block and bump the counter.
    Vec encode(const PacketRecord& rec) const;

    const FeatureSpec& spec() const { return spec_; }
    std::uint64_t unknown_count() const { return unknown_.load(); }

private:
    FeatureSpec spec_;
    std::vector<int> numeric_cols_;
    std::vector<std::string> numeric_names_;
    int cat_col_ = -1;
    std::unordered_map<std::string, int> vocab_index_;
    mutable std::atomic<std::uint64_t> unknown_{0};
};

/// One sliding window: T consecutive engineered packets, labeled by the last.
struct WindowTensor {
    Mat data; // T x 25
    int label = 0;
    std::uint64_t origin_index = 0; // index of the window's last packet
};

/// Stride-1 windows over an engineered stream. Windows are zero-copy views
/// into one m x width matrix; window i spans packet rows [i, i+T).
class WindowSet {
public:
    WindowSet() = default;
    WindowSet(Mat rows, std::vector<std::uint8_t> labels, int T);

    std::size_t count() const { return count_; }
    int window_len() const { return T_; }
    int width() const { return static_cast<int>(rows_.cols()); }
    std::size_t packet_count() const { return static_cast<std::size_t>(rows_.rows()); }

    MatMap window(std::size_t i) const {
        return MatMap(rows_.data() + static_cast<std::ptrdiff_t>(i) * rows_.cols(), T_,
                      rows_.cols());
    }
    int label(std::size_t i) const { return labels_[i + static_cast<std::size_t>(T_) - 1]; }
    std::uint64_t origin(std::size_t i) const { return i + static_cast<std::uint64_t>(T_) - 1; }
    WindowTensor copy(std::size_t i) const { return {Mat(window(i)), label(i), origin(i)}; }

    const Mat& rows() const { return rows_; }
    const std::vector<std::uint8_t>& row_labels() const { return labels_; }

    std::size_t attack_count() const;

private:
    Mat rows_;
    std::vector<std::uint8_t> labels_;
    int T_ = 0;
    std::size_t count_ = 0;
};

/// Exactly m - T + 1 windows; throws SpecError when m < T.
WindowSet make_windows(Mat rows, std::vector<std::uint8_t> labels, int T);

/// Engineer every record and window the result in one pass.
WindowSet engineer_windows(const std::vector<PacketRecord>& records, const FeatureEncoder& enc,
                           int T);

void save_window_archive(const WindowSet& ws, const std::string& path);
WindowSet load_window_archive(const std::string& path);

} // namespace edet
