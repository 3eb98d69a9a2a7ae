#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "edet/metrics.hpp"
#include "edet/model.hpp"
#include "helpers.hpp"

using namespace edet;

namespace {

Confusion random_confusion(Rng& rng) {
    Confusion c;
    c.tp = rng.below(200);
    c.fp = rng.below(200);
    c.tn = rng.below(200);
    c.fn = rng.below(200);
    if (c.tp + c.fp + c.tn + c.fn == 0)
        c.tp = 1;
    return c;
}

/// Straight-from-definition recomputation used as the 1e-12 oracle.
struct Reference {
    double accuracy, precision, recall, f1, kappa;
};

Reference reference_metrics(const Confusion& c) {
    double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    double total = tp + fp + tn + fn;
    Reference r{};
    r.accuracy = (tp + tn) / total;
    r.precision = tp + fp == 0.0 ? 0.0 : tp / (tp + fp);
    r.recall = tp + fn == 0.0 ? 0.0 : tp / (tp + fn);
    r.f1 = r.precision + r.recall == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    double po = r.accuracy;
    double pe = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (total * total);
    r.kappa = pe == 1.0 ? 0.0 : (po - pe) / (1.0 - pe);
    return r;
}

} // namespace

TEST_CASE("hand-worked confusion matrix") {
    Confusion c{2, 1, 3, 0};
    CHECK(precision(c) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(recall(c) == 1.0);
    CHECK(f1_score(c) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(accuracy(c) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(kappa(c) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("perfect classifier maxes every metric") {
    Confusion c{10, 0, 14, 0};
    CHECK(accuracy(c) == 1.0);
    CHECK(precision(c) == 1.0);
    CHECK(recall(c) == 1.0);
    CHECK(f1_score(c) == 1.0);
    CHECK(kappa(c) == 1.0);
    std::vector<double> s{0.9, 0.95, 0.1, 0.2};
    std::vector<int> y{1, 1, 0, 0};
    CHECK(auc(s, y) == 1.0);
}

TEST_CASE("degenerate conventions return zero") {
    Confusion no_pred_pos{0, 0, 5, 3};
    CHECK(precision(no_pred_pos) == 0.0);
    Confusion no_real_pos{0, 2, 6, 0};
    CHECK(recall(no_real_pos) == 0.0);
    CHECK(f1_score(no_pred_pos) == 0.0);
    Confusion all_tp{4, 0, 0, 0}; // p_e = 1
    CHECK(kappa(all_tp) == 0.0);
}

TEST_CASE("1000 random confusions match the reference to 1e-12") {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
        Confusion c = random_confusion(rng);
        Reference r = reference_metrics(c);
        CHECK(std::abs(accuracy(c) - r.accuracy) <= 1e-12);
        CHECK(std::abs(precision(c) - r.precision) <= 1e-12);
        CHECK(std::abs(recall(c) - r.recall) <= 1e-12);
        CHECK(std::abs(f1_score(c) - r.f1) <= 1e-12);
        CHECK(std::abs(kappa(c) - r.kappa) <= 1e-12);
    }
}

TEST_CASE("auc worked examples") {
    std::vector<double> perfect{0.9, 0.1};
    std::vector<int> yp{1, 0};
    CHECK(auc(perfect, yp) == 1.0);

    std::vector<double> ties{0.4, 0.4, 0.4, 0.4};
    std::vector<int> yt{1, 0, 1, 0};
    CHECK(auc(ties, yt) == 0.5);

    std::vector<double> mixed{0.8, 0.8, 0.3, 0.1};
    std::vector<int> ym{1, 0, 1, 0};
    CHECK(auc(mixed, ym) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(auc(mixed, ym) == testutil::brute_auc(mixed, ym));
}

TEST_CASE("auc equals brute force on random score sets") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.below(60);
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Quantized scores force plenty of exact ties.
            s[i] = static_cast<double>(rng.below(8)) / 8.0;
            y[i] = static_cast<int>(rng.below(2));
            (y[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) {
            CHECK_THROWS_AS(auc(s, y), SpecError);
            continue;
        }
        CHECK(auc(s, y) == testutil::brute_auc(s, y));
    }
}

TEST_CASE("auc is invariant under monotone transforms") {
    Rng rng(8);
    std::vector<double> s(40);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = rng.uniform();
        y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    double base = auc(s, y);
    std::vector<double> t = s;
    for (auto& v : t)
        v = std::exp(3.0 * v) + 7.0;
    CHECK(auc(t, y) == base);
}

TEST_CASE("auc rejects bad inputs") {
    std::vector<double> s{0.5, 0.6};
    std::vector<int> ones{1, 1};
    CHECK_THROWS_AS(auc(s, ones), SpecError);
    std::vector<int> wrong{1};
    CHECK_THROWS_AS(auc(s, wrong), ShapeError);
}

TEST_CASE("random scores and labels hit the statistical baselines") {
    Rng rng(2718);
    std::size_t n = 10000;
    std::vector<double> s(n);
    std::vector<int> y(n);
    Confusion c;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = rng.uniform();
        y[i] = static_cast<int>(rng.below(2));
        bool pred = s[i] >= 0.5;
        if (pred && y[i])
            ++c.tp;
        else if (pred && !y[i])
            ++c.fp;
        else if (!pred && y[i])
            ++c.fn;
        else
            ++c.tn;
    }
    CHECK(std::abs(auc(s, y) - 0.5) < 0.02);
    CHECK(std::abs(kappa(c)) < 0.03);
}

TEST_CASE("evaluate_model produces an order- and thread-independent report") {
    ModelConfig cfg = edge_detect_config(CellKind::FastGRNN);
    cfg.hidden = 8;
    cfg.dense = 6;
    ModelParams m = build_model(cfg, 21);
    auto ws = testutil::random_windows(300, 10, 25, 22);

    MetricsReport serial = evaluate_model(m, ws, 0.5, 1);
    MetricsReport fourway = evaluate_model(m, ws, 0.5, 4);
    CHECK(serial.accuracy == fourway.accuracy);
    CHECK(serial.loss == fourway.loss);
    CHECK(serial.auc == fourway.auc);
    CHECK(serial.kappa == fourway.kappa);
    CHECK(serial.confusion.tp == fourway.confusion.tp);
    CHECK(serial.confusion.fn == fourway.confusion.fn);

    CHECK(serial.confusion.tp + serial.confusion.fp + serial.confusion.tn +
              serial.confusion.fn ==
          ws.count());
    CHECK(serial.cell == "FastGRNN");
    CHECK(serial.test_wall_time_s >= 0.0);
    CHECK(serial.loss > 0.0);
}

TEST_CASE("evaluate_model flags every window above threshold as attack") {
    ModelConfig cfg = edge_detect_config(CellKind::FastRNN);
    cfg.hidden = 4;
    cfg.dense = 3;
    ModelParams m = build_model(cfg, 31);
    auto ws = testutil::random_windows(80, 5, 25, 32);
    MetricsReport r = evaluate_model(m, ws, 0.5, 1);
    std::uint64_t manual_tp = 0, manual_fp = 0;
    for (std::size_t i = 0; i < ws.count(); ++i) {
        double p = infer_forward(m, ws.window(i));
        if (!classify(p, 0.5))
            continue;
        (ws.label(i) ? manual_tp : manual_fp)++;
    }
    CHECK(r.confusion.tp == manual_tp);
    CHECK(r.confusion.fp == manual_fp);
}

TEST_CASE("single-class evaluation data zeroes auc but keeps the rest") {
    ModelConfig cfg = edge_detect_config(CellKind::FastRNN);
    cfg.hidden = 4;
    cfg.dense = 3;
    ModelParams m = build_model(cfg, 41);
    Rng rng(42);
    Mat rows(30, 25);
    for (Eigen::Index i = 0; i < rows.size(); ++i)
        rows.data()[i] = rng.uniform();
    std::vector<std::uint8_t> labels(30, 1);
    auto ws = make_windows(std::move(rows), std::move(labels), 6);
    MetricsReport r = evaluate_model(m, ws, 0.5, 1);
    CHECK(r.auc == 0.0);
    CHECK(r.confusion.tn == 0);
    CHECK(r.confusion.fp == 0);
}

TEST_CASE("empty window set is refused") {
    ModelConfig cfg = edge_detect_config(CellKind::FastRNN);
    cfg.hidden = 4;
    cfg.dense = 3;
    ModelParams m = build_model(cfg, 51);
    WindowSet empty;
    CHECK_THROWS_AS(evaluate_model(m, empty, 0.5, 1), SpecError);
}

TEST_CASE("metrics report serializes every field") {
    MetricsReport r;
    r.cell = "FastRNN";
    r.accuracy = 0.5;
    r.loss = 0.25;
    r.precision = 0.75;
    r.recall = 0.5;
    r.f1 = 0.6;
    r.auc = 0.7;
    r.kappa = 0.1;
    r.confusion = {1, 2, 3, 4};
    r.test_wall_time_s = 1.5;
    std::string j = metrics_json(r);
    for (const char* key : {"\"cell\"", "\"accuracy\"", "\"loss\"", "\"precision\"",
                            "\"recall\"", "\"f1\"", "\"auc\"", "\"kappa\"", "\"confusion\"",
                            "\"tp\"", "\"fp\"", "\"tn\"", "\"fn\"", "\"test_wall_time_s\""})
        CHECK(j.find(key) != std::string::npos);
}
