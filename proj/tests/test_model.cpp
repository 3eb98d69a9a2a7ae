#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "edet/model.hpp"
#include "edet/synthetic.hpp"
#include "edet/train.hpp"
#include "helpers.hpp"

using namespace edet;

TEST_CASE("preset configurations") {
    ModelConfig e = edge_detect_config(CellKind::FastGRNN);
    CHECK(e.rnn_layers == 1);
    CHECK(e.hidden == 128);
    CHECK(e.dense == 128);
    CHECK(e.input == 25);
    CHECK(e.threshold == 0.8);
    ModelConfig d = deepdefense_config(CellKind::GRU);
    CHECK(d.rnn_layers == 4);
    CHECK(d.hidden == 64);

    ModelConfig bad = e;
    bad.hidden = 0;
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = e;
    bad.threshold = 1.0;
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = e;
    bad.threshold = 0.0;
    CHECK_THROWS_AS(bad.validate(), SpecError);
}

TEST_CASE("parameter counts reproduce the published ordering") {
    ModelParams fastrnn = build_model(edge_detect_config(CellKind::FastRNN), 1);
    ModelParams fastgrnn = build_model(edge_detect_config(CellKind::FastGRNN), 1);
    std::size_t fr_rec = cell_param_count(fastrnn.cells[0]);
    std::size_t fg_rec = cell_param_count(fastgrnn.cells[0]);
    CHECK(fr_rec == 19714);
    CHECK(fg_rec == 19842);
    CHECK(fr_rec < fg_rec);

    // Head shared by both presets: recurrent BN + dense stack + output.
    std::size_t head = std::size_t(2 * 128)             // recurrent-layer BN
                       + std::size_t(128 * 128 + 128)   // dense
                       + std::size_t(2 * 128)           // dense BN
                       + std::size_t(128 + 1);          // output
    CHECK(param_count(fastgrnn) == fg_rec + head);
    CHECK(param_count(fastgrnn) == 36995);

    ModelParams deep = build_model(deepdefense_config(CellKind::GRU), 1);
    std::size_t deep_rec = 0;
    for (const auto& c : deep.cells)
        deep_rec += cell_param_count(c);
    CHECK(deep_rec == std::size_t(3 * (64 * 25 + 64 * 64 + 64) + 3 * 3 * (64 * 64 + 64 * 64 + 64)));
    CHECK(deep_rec == 91584);
    CHECK(param_count(deep) == 100801);

    double ratio = static_cast<double>(param_count(fastgrnn)) /
                   static_cast<double>(param_count(deep));
    CHECK(ratio >= 0.30);
    CHECK(ratio <= 0.45);
}

TEST_CASE("build_model is deterministic in the seed") {
    ModelParams a = build_model(edge_detect_config(CellKind::FastRNN), 99);
    ModelParams b = build_model(edge_detect_config(CellKind::FastRNN), 99);
    ModelParams c = build_model(edge_detect_config(CellKind::FastRNN), 100);
    CHECK((a.cells[0].W.array() == b.cells[0].W.array()).all());
    CHECK((a.dense_w.array() == b.dense_w.array()).all());
    CHECK((a.out_w.array() == b.out_w.array()).all());
    CHECK_FALSE((a.cells[0].W.array() == c.cells[0].W.array()).all());
    a.validate();
}

TEST_CASE("zero network scores one half") {
    ModelConfig cfg;
    cfg.cell = CellKind::FastGRNN;
    cfg.rnn_layers = 1;
    cfg.hidden = 4;
    cfg.dense = 3;
    cfg.input = 2;
    ModelParams m = build_model(cfg, 1);
    m.cells[0].W.setZero();
    m.cells[0].U.setZero();
    m.cells[0].b.setZero();
    m.cells[0].s1_raw = 500.0;  // zeta = 1
    m.cells[0].s2_raw = -500.0; // nu = 0
    m.dense_w.setZero();
    m.dense_b.setZero();
    m.out_w.setZero();
    m.out_b = 0.0;
    Mat window = Mat::Ones(5, 2) * 0.3;
    CHECK(infer_forward(m, window) == 0.5);
}

TEST_CASE("probability is strictly inside (0,1)") {
    ModelConfig cfg = edge_detect_config(CellKind::FastRNN);
    cfg.hidden = 8;
    cfg.dense = 8;
    ModelParams m = build_model(cfg, 3);
    auto ws = testutil::random_windows(60, 10, 25, 5);
    for (std::size_t i = 0; i < ws.count(); ++i) {
        double p = infer_forward(m, ws.window(i));
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("threshold boundary is attack-inclusive") {
    CHECK(classify(0.9, 0.8));
    CHECK(classify(0.8, 0.8));
    CHECK_FALSE(classify(0.79, 0.8));
}

TEST_CASE("infer_forward rejects wrong window width") {
    ModelConfig cfg = edge_detect_config(CellKind::FastRNN);
    cfg.hidden = 4;
    cfg.dense = 4;
    ModelParams m = build_model(cfg, 1);
    Mat wrong = Mat::Zero(5, 7);
    CHECK_THROWS_AS(infer_forward(m, wrong), ShapeError);
}

TEST_CASE("prediction carries origin and verdict") {
    ModelConfig cfg = edge_detect_config(CellKind::FastGRNN);
    cfg.hidden = 4;
    cfg.dense = 4;
    ModelParams m = build_model(cfg, 2);
    auto ws = testutil::random_windows(30, 6, 25, 8);
    Prediction p = predict(m, ws.window(4), ws.origin(4));
    CHECK(p.origin_index == 9);
    CHECK(p.attack == classify(p.p_attack, m.config.threshold));
}

TEST_CASE("stacked layers run and differ from single layer") {
    ModelConfig one = edge_detect_config(CellKind::FastGRNN);
    one.hidden = 6;
    one.dense = 4;
    ModelConfig four = one;
    four.rnn_layers = 4;
    ModelParams m1 = build_model(one, 4);
    ModelParams m4 = build_model(four, 4);
    CHECK(m4.cells.size() == 4);
    CHECK(m4.rnn_bn.size() == 4);
    CHECK(m4.cells[1].W.cols() == 6); // deeper layers consume hidden width
    auto ws = testutil::random_windows(20, 5, 25, 9);
    double p1 = infer_forward(m1, ws.window(0));
    double p4 = infer_forward(m4, ws.window(0));
    CHECK(p1 != p4);
}

TEST_CASE("a trained model is sequence sensitive") {
    auto recs = generate_synthetic(1200, 0.5, 31);
    Schema schema = synthetic_schema();
    std::vector<std::string> sel(schema.columns.begin(), schema.columns.end() - 1);
    auto spec = fit_feature_spec(recs, schema, sel, "state");
    FeatureEncoder enc(spec, schema);
    auto ws = engineer_windows(recs, enc, 8);

    ModelConfig cfg = edge_detect_config(CellKind::FastRNN);
    cfg.hidden = 16;
    cfg.dense = 8;
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 32;
    tc.seed = 7;
    TrainResult tr = train_model(build_model(cfg, 7), ws, tc);

    // Swapping two non-final rows changes the score for at least one window.
    int changed = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        Mat w = ws.copy(i).data;
        double before = infer_forward(tr.model, w);
        w.row(1).swap(w.row(4));
        double after = infer_forward(tr.model, w);
        if (before != after)
            ++changed;
    }
    CHECK(changed > 0);
}
