#include "edet/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "edet/bptt.hpp"
#include "edet/errors.hpp"

namespace edet {

double accuracy(const Confusion& c) {
    auto n = c.total();
    return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

double precision(const Confusion& c) {
    auto d = c.tp + c.fp;
    return d == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(d);
}

double recall(const Confusion& c) {
    auto d = c.tp + c.fn;
    return d == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(d);
}

double f1_score(const Confusion& c) {
    double p = precision(c), r = recall(c);
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double kappa(const Confusion& c) {
    auto n = c.total();
    if (n == 0)
        return 0.0;
    double dn = static_cast<double>(n);
    double po = static_cast<double>(c.tp + c.tn) / dn;
    double pe = (static_cast<double>(c.tp + c.fp) * static_cast<double>(c.tp + c.fn) +
                 static_cast<double>(c.fn + c.tn) * static_cast<double>(c.fp + c.tn)) /
                (dn * dn);
    if (pe == 1.0)
        return 0.0;
    return (po - pe) / (1.0 - pe);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw ShapeError("auc: score/label count mismatch");
    std::size_t npos = 0;
    for (int l : labels)
        npos += static_cast<std::size_t>(l);
    std::size_t nneg = scores.size() - npos;
    if (npos == 0 || nneg == 0)
        throw SpecError("AUC is undefined when only one class is present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks across tie groups; rank sum of the positive class gives
    // the Mann-Whitney statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]])
            ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1)
                rank_sum_pos += avg_rank;
        i = j;
    }
    double u = rank_sum_pos - static_cast<double>(npos) * static_cast<double>(npos + 1) / 2.0;
    return u / (static_cast<double>(npos) * static_cast<double>(nneg));
}

MetricsReport evaluate_model(const ModelParams& m, const WindowSet& data, double threshold,
                             int threads) {
    if (data.count() == 0)
        throw SpecError("evaluation data is empty");
    auto t0 = std::chrono::steady_clock::now();

    const std::size_t n = data.count();
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    auto score_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            scores[i] = infer_forward(m, data.window(i));
            labels[i] = data.label(i);
        }
    };
    int nthreads = std::max(1, threads);
    if (nthreads == 1 || n < 2 * static_cast<std::size_t>(nthreads)) {
        score_range(0, n);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (n + static_cast<std::size_t>(nthreads) - 1) /
                            static_cast<std::size_t>(nthreads);
        for (int t = 0; t < nthreads; ++t) {
            std::size_t lo = static_cast<std::size_t>(t) * chunk;
            std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back(score_range, lo, hi);
        }
        for (auto& th : pool)
            th.join();
    }

    MetricsReport r;
    r.cell = to_string(m.config.cell);
    std::vector<double> losses(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool attack = classify(scores[i], threshold);
        if (labels[i] == 1)
            (attack ? r.confusion.tp : r.confusion.fn) += 1;
        else
            (attack ? r.confusion.fp : r.confusion.tn) += 1;
        losses[i] = bce(scores[i], labels[i]);
    }
    std::sort(losses.begin(), losses.end());
    double loss_sum = 0.0;
    for (double l : losses)
        loss_sum += l;
    r.loss = loss_sum / static_cast<double>(n);
    r.accuracy = accuracy(r.confusion);
    r.precision = precision(r.confusion);
    r.recall = recall(r.confusion);
    r.f1 = f1_score(r.confusion);
    r.kappa = kappa(r.confusion);
    bool single_class = r.confusion.tp + r.confusion.fn == 0 ||
                        r.confusion.fp + r.confusion.tn == 0;
    r.auc = single_class ? 0.0 : auc(scores, labels);
    r.test_wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string metrics_json(const MetricsReport& r) {
    nlohmann::json j{{"cell", r.cell},
                     {"accuracy", r.accuracy},
                     {"loss", r.loss},
                     {"precision", r.precision},
                     {"recall", r.recall},
                     {"f1", r.f1},
                     {"auc", r.auc},
                     {"kappa", r.kappa},
                     {"confusion",
                      {{"tp", r.confusion.tp},
                       {"fp", r.confusion.fp},
                       {"tn", r.confusion.tn},
                       {"fn", r.confusion.fn}}},
                     {"test_wall_time_s", r.test_wall_time_s}};
    return j.dump(2);
}

} // namespace edet
