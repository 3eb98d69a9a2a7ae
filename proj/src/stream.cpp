#include "edet/stream.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "edet/errors.hpp"

namespace edet {

StreamDetector::StreamDetector(const ModelParams& model, const FeatureEncoder& enc, int T)
    : model_(model), enc_(enc), T_(T) {
    if (T_ < 1)
        throw SpecError("window length must be at least 1, got " + std::to_string(T_));
    if (model_.config.input != enc_.spec().engineered_width())
        throw ShapeError("model expects input width " + std::to_string(model_.config.input) +
                         ", encoder produces " + std::to_string(enc_.spec().engineered_width()));
    bool tagged = false;
    for (auto b : model_.feature_digest)
        tagged = tagged || b != 0;
    if (tagged && model_.feature_digest != feature_spec_digest(enc_.spec()))
        throw DigestMismatch("model was trained against a different feature spec");
    ring_ = Mat::Zero(T_, model_.config.input);
}

std::optional<Prediction> StreamDetector::push(const PacketRecord& rec) {
    Vec v = enc_.encode(rec);
    ring_.row(next_) = v.transpose();
    next_ = (next_ + 1) % T_;
    filled_ = std::min(filled_ + 1, T_);
    ++counters_.packets_seen;
    if (filled_ < T_)
        return std::nullopt;
    // Rebuild the window oldest-first; next_ points at the oldest row.
    Mat window(T_, ring_.cols());
    for (int i = 0; i < T_; ++i)
        window.row(i) = ring_.row((next_ + i) % T_);
    Prediction pred = predict(model_, window, counters_.packets_seen - 1);
    ++counters_.windows_classified;
    if (pred.attack)
        ++counters_.attacks_flagged;
    return pred;
}

StreamCounters StreamDetector::counters() const {
    StreamCounters c = counters_;
    c.unknown_categories = enc_.unknown_count();
    return c;
}

StreamCounters detect_stream(std::istream& in, const Schema& schema, StreamDetector& det,
                             std::ostream& out, std::ostream* warnings) {
    CsvReader reader(in, schema);
    std::uint64_t malformed = 0;
    while (true) {
        std::optional<PacketRecord> rec;
        try {
            rec = reader.next();
        } catch (const ParseError& e) {
            ++malformed;
            if (warnings)
                *warnings << "warning: skipping " << e.what() << '\n';
            continue;
        }
        if (!rec)
            break;
        std::optional<Prediction> pred;
        try {
            pred = det.push(*rec);
        } catch (const ParseError& e) {
            ++malformed;
            if (warnings)
                *warnings << "warning: skipping row " << reader.line() << ": " << e.what()
                          << '\n';
            continue;
        }
        if (pred) {
            nlohmann::json j{{"index", pred->origin_index},
                             {"p_attack", pred->p_attack},
                             {"verdict", pred->attack ? "attack" : "normal"}};
            out << j.dump() << '\n';
        }
    }
    StreamCounters c = det.counters();
    c.malformed_skipped = malformed;
    return c;
}

} // namespace edet
