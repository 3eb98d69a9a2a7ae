#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "edet/features.hpp"
#include "edet/model.hpp"

namespace edet {

struct Confusion {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Closed forms over confusion counts. Degenerate denominators yield 0
// (precision with no positive predictions, recall with no positives, f1 with
// p + r = 0, kappa with expected agreement 1).
double accuracy(const Confusion& c);
double precision(const Confusion& c);
double recall(const Confusion& c);
double f1_score(const Confusion& c);
double kappa(const Confusion& c);

/// Mann-Whitney AUC: fraction of (attack, normal) pairs where the attack
/// score is higher, ties counted half. Computed by average ranks, which is
/// exactly the brute-force pair count. Throws SpecError when only one class
/// is present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// All scalar metrics live in [0, 1]; loss is the mean clamped BCE.
struct MetricsReport {
    std::string cell;
    double accuracy = 0.0;
    double loss = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double kappa = 0.0;
    Confusion confusion;
    double test_wall_time_s = 0.0;
};

/// Infer-mode scoring of every window. Order-independent by construction:
/// confusion counts are integers, per-window losses are sorted before
/// summation, and AUC ranks the score multiset. `threads` > 1 splits the
/// forward passes; every reduction is position-stable so the report is
/// identical for any thread count.
MetricsReport evaluate_model(const ModelParams& m, const WindowSet& data, double threshold,
                             int threads = 1);

std::string metrics_json(const MetricsReport& r);

} // namespace edet
