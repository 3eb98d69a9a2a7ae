#include "edet/features.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "digest.hpp"

namespace edet {

namespace {

constexpr int kSelectedCount = 11;

double parse_numeric(const std::string& cell, std::size_t row, const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || cell.empty())
        throw ParseError(row, "column '" + column + "': not numeric: '" + cell + "'");
    return v;
}

} // namespace

void FeatureSpec::validate() const {
    if (static_cast<int>(selected.size()) != kSelectedCount)
        throw SpecError("expected " + std::to_string(kSelectedCount) + " selected columns, got " +
                        std::to_string(selected.size()));
    std::unordered_set<std::string> seen;
    for (const auto& name : selected)
        if (!seen.insert(name).second)
            throw SpecError("duplicate selected column '" + name + "'");
    if (!seen.count(categorical))
        throw SpecError("categorical column '" + categorical + "' not among selected columns");
    if (static_cast<int>(vocab.size()) != kVocabWidth)
        throw SpecError("vocabulary must have exactly " + std::to_string(kVocabWidth) +
                        " entries, got " + std::to_string(vocab.size()));
    std::unordered_set<std::string> vseen;
    for (const auto& v : vocab)
        if (!vseen.insert(v).second)
            throw SpecError("duplicate vocabulary entry '" + v + "'");
    if (static_cast<int>(stats.size()) != numeric_count())
        throw SpecError("expected " + std::to_string(numeric_count()) +
                        " per-feature stats, got " + std::to_string(stats.size()));
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        if (!std::isfinite(s.min) || !std::isfinite(s.max) || s.min > s.max)
            throw SpecError("invalid stats for numeric feature " + std::to_string(i));
    }
}

FeatureSpec fit_feature_spec(const std::vector<PacketRecord>& records, const Schema& schema,
                             std::vector<std::string> selected, std::string categorical) {
    schema.validate();
    if (records.empty())
        throw SpecError("cannot fit a feature spec on zero records");

    FeatureSpec spec;
    spec.selected = std::move(selected);
    spec.categorical = std::move(categorical);

    std::vector<int> numeric_cols;
    int cat_col = -1;
    for (const auto& name : spec.selected) {
        int idx = schema.column_index(name);
        if (idx < 0)
            throw SpecError("selected column '" + name + "' not in schema");
        if (name == spec.categorical)
            cat_col = idx;
        else
            numeric_cols.push_back(idx);
    }
    if (cat_col < 0)
        throw SpecError("categorical column '" + spec.categorical +
                        "' not among selected columns");

    std::unordered_set<std::string> seen_cat;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (static_cast<int>(rec.values.size()) != schema.width())
            throw ParseError(r + 1, "record has " + std::to_string(rec.values.size()) +
                                        " cells, schema expects " +
                                        std::to_string(schema.width()));
        const std::string& cat = rec.values[static_cast<std::size_t>(cat_col)];
        if (seen_cat.insert(cat).second)
            spec.vocab.push_back(cat);
        for (std::size_t f = 0; f < numeric_cols.size(); ++f) {
            std::size_t col = static_cast<std::size_t>(numeric_cols[f]);
            double v = parse_numeric(rec.values[col], r + 1, schema.columns[col]);
            if (!std::isfinite(v))
                throw ParseError(r + 1, "column '" + schema.columns[col] + "': non-finite value");
            if (r == 0) {
                spec.stats.push_back({v, v});
            } else {
                spec.stats[f].min = std::min(spec.stats[f].min, v);
                spec.stats[f].max = std::max(spec.stats[f].max, v);
            }
        }
    }

    if (static_cast<int>(spec.vocab.size()) > FeatureSpec::kVocabWidth) {
        std::string surplus;
        for (std::size_t i = FeatureSpec::kVocabWidth; i < spec.vocab.size(); ++i) {
            if (!surplus.empty())
                surplus += ", ";
            surplus += "'" + spec.vocab[i] + "'";
        }
        throw SpecError("categorical column '" + spec.categorical + "' has " +
                        std::to_string(spec.vocab.size()) +
                        " distinct values but the one-hot block holds " +
                        std::to_string(FeatureSpec::kVocabWidth) + "; surplus: " + surplus);
    }

    // Fixed-width vocabulary: fill leftover slots with placeholder names that
    // can never collide with a real category already present.
    int reserve_id = 0;
    std::unordered_set<std::string> in_vocab(spec.vocab.begin(), spec.vocab.end());
    while (static_cast<int>(spec.vocab.size()) < FeatureSpec::kVocabWidth) {
        std::string slot = "__reserved_" + std::to_string(reserve_id++);
        if (in_vocab.count(slot))
            continue;
        in_vocab.insert(slot);
        spec.vocab.push_back(slot);
    }

    spec.validate();
    return spec;
}

namespace {

nlohmann::json spec_to_json(const FeatureSpec& spec) {
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& s : spec.stats)
        stats.push_back({{"min", s.min}, {"max", s.max}});
    return {{"selected", spec.selected},
            {"categorical", spec.categorical},
            {"vocab", spec.vocab},
            {"stats", stats}};
}

FeatureSpec spec_from_json(const nlohmann::json& j) {
    FeatureSpec spec;
    spec.selected = j.at("selected").get<std::vector<std::string>>();
    spec.categorical = j.at("categorical").get<std::string>();
    spec.vocab = j.at("vocab").get<std::vector<std::string>>();
    for (const auto& s : j.at("stats"))
        spec.stats.push_back({s.at("min").get<double>(), s.at("max").get<double>()});
    spec.validate();
    return spec;
}

} // namespace

std::string feature_spec_canonical_json(const FeatureSpec& spec) {
    return spec_to_json(spec).dump();
}

std::array<std::uint8_t, 32> feature_spec_digest(const FeatureSpec& spec) {
    std::string canon = feature_spec_canonical_json(spec);
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(canon.data()), canon.size()));
}

void save_feature_spec(const FeatureSpec& spec, const std::string& path) {
    spec.validate();
    std::ofstream out(path);
    if (!out)
        throw SpecError("cannot open '" + path + "' for writing");
    out << spec_to_json(spec).dump(2) << '\n';
    if (!out)
        throw SpecError("failed writing feature spec to '" + path + "'");
}

FeatureSpec load_feature_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SpecError("cannot open feature spec '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        return spec_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("malformed feature spec '" + path + "': " + e.what());
    }
}

FeatureEncoder::FeatureEncoder(FeatureSpec spec, const Schema& schema) : spec_(std::move(spec)) {
    spec_.validate();
    schema.validate();
    for (const auto& name : spec_.selected) {
        int idx = schema.column_index(name);
        if (idx < 0)
            throw SpecError("selected column '" + name + "' not in schema");
        if (name == spec_.categorical) {
            cat_col_ = idx;
        } else {
            numeric_cols_.push_back(idx);
            numeric_names_.push_back(name);
        }
    }
    for (std::size_t i = 0; i < spec_.vocab.size(); ++i)
        vocab_index_.emplace(spec_.vocab[i], static_cast<int>(i));
}

Vec FeatureEncoder::encode(const PacketRecord& rec) const {
    Vec out = Vec::Zero(spec_.engineered_width());
    for (std::size_t f = 0; f < numeric_cols_.size(); ++f) {
        std::size_t col = static_cast<std::size_t>(numeric_cols_[f]);
        if (col >= rec.values.size())
            throw ParseError(0, "record narrower than schema");
        double v = parse_numeric(rec.values[col], 0, numeric_names_[f]);
        const auto& s = spec_.stats[f];
        double range = s.max - s.min;
        double t = range > 0.0 ? (v - s.min) / range : 0.0;
        out[static_cast<Eigen::Index>(f)] = std::clamp(t, 0.0, 1.0);
    }
    const std::string& cat = rec.values[static_cast<std::size_t>(cat_col_)];
    auto it = vocab_index_.find(cat);
    if (it != vocab_index_.end())
        out[spec_.numeric_count() + it->second] = 1.0;
    else
        unknown_.fetch_add(1, std::memory_order_relaxed);
    return out;
}

WindowSet::WindowSet(Mat rows, std::vector<std::uint8_t> labels, int T)
    : rows_(std::move(rows)), labels_(std::move(labels)), T_(T) {
    if (T_ < 1)
        throw SpecError("window length must be at least 1, got " + std::to_string(T_));
    if (rows_.cols() < 1)
        throw ShapeError("engineered rows must have at least one column");
    if (static_cast<std::size_t>(rows_.rows()) != labels_.size())
        throw ShapeError("row/label count mismatch: " + std::to_string(rows_.rows()) + " vs " +
                         std::to_string(labels_.size()));
    auto m = static_cast<std::size_t>(rows_.rows());
    if (m < static_cast<std::size_t>(T_))
        throw SpecError("insufficient packets for one window: m=" + std::to_string(m) +
                        " < T=" + std::to_string(T_));
    count_ = m - static_cast<std::size_t>(T_) + 1;
}

std::size_t WindowSet::attack_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < count_; ++i)
        n += static_cast<std::size_t>(label(i));
    return n;
}

WindowSet make_windows(Mat rows, std::vector<std::uint8_t> labels, int T) {
    return WindowSet(std::move(rows), std::move(labels), T);
}

WindowSet engineer_windows(const std::vector<PacketRecord>& records, const FeatureEncoder& enc,
                           int T) {
    Mat rows(static_cast<Eigen::Index>(records.size()), enc.spec().engineered_width());
    std::vector<std::uint8_t> labels(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        rows.row(static_cast<Eigen::Index>(i)) = enc.encode(records[i]).transpose();
        labels[i] = static_cast<std::uint8_t>(records[i].label);
    }
    return make_windows(std::move(rows), std::move(labels), T);
}

namespace {
constexpr char kArchiveMagic[4] = {'E', 'D', 'W', 'A'};
constexpr std::uint32_t kArchiveVersion = 1;
} // namespace

void save_window_archive(const WindowSet& ws, const std::string& path) {
    binio::Writer w;
    w.bytes(kArchiveMagic, 4);
    w.u32(kArchiveVersion);
    w.u16(static_cast<std::uint16_t>(ws.window_len()));
    w.tensor("rows", ws.rows());
    const auto& labels = ws.row_labels();
    w.u64(labels.size());
    w.bytes(labels.data(), labels.size());
    w.crc_trailer();
    binio::write_file(path, w.bytes());
}

WindowSet load_window_archive(const std::string& path) {
    auto buf = binio::read_file(path);
    binio::Reader r(buf);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kArchiveMagic, 4) != 0)
        throw ModelIoError(ModelIoErrc::bad_magic, "'" + path + "' is not a window archive");
    std::uint32_t version = r.u32();
    if (version != kArchiveVersion)
        throw ModelIoError(ModelIoErrc::bad_version,
                           "unsupported archive version " + std::to_string(version));
    int T = r.u16();
    auto rows_rec = r.tensor();
    if (rows_rec.dims.size() != 2)
        throw ModelIoError(ModelIoErrc::bad_shape, "archive rows tensor must be 2-D");
    std::uint64_t n_labels = r.u64();
    if (n_labels != rows_rec.dims[0])
        throw ModelIoError(ModelIoErrc::bad_shape, "label count does not match packet rows");
    std::vector<std::uint8_t> labels(n_labels);
    r.bytes(labels.data(), labels.size());
    r.verify_crc_trailer();
    for (auto b : labels)
        if (b > 1)
            throw ModelIoError(ModelIoErrc::corrupt_data, "label byte out of range");
    try {
        Mat rows = tensor_from_f32(static_cast<Eigen::Index>(rows_rec.dims[0]),
                                   static_cast<Eigen::Index>(rows_rec.dims[1]), rows_rec.data,
                                   true);
        return WindowSet(std::move(rows), std::move(labels), T);
    } catch (const TensorError& e) {
        throw ModelIoError(ModelIoErrc::corrupt_data, e.what());
    } catch (const SpecError& e) {
        throw ModelIoError(ModelIoErrc::corrupt_data, e.what());
    } catch (const ShapeError& e) {
        throw ModelIoError(ModelIoErrc::bad_shape, e.what());
    }
}

} // namespace edet
