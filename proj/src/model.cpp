#include "edet/model.hpp"

#include <cmath>

#include "edet/errors.hpp"

namespace edet {

void ModelConfig::validate() const {
    if (rnn_layers < 1 || hidden < 1 || dense < 1 || input < 1)
        throw SpecError("model dimensions must be positive");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw SpecError("threshold must lie strictly in (0, 1)");
}

ModelConfig edge_detect_config(CellKind cell) {
    ModelConfig c;
    c.cell = cell;
    c.rnn_layers = 1;
    c.hidden = 128;
    c.dense = 128;
    c.input = 25;
    c.threshold = 0.8;
    return c;
}

ModelConfig deepdefense_config(CellKind cell) {
    ModelConfig c = edge_detect_config(cell);
    c.rnn_layers = 4;
    c.hidden = 64;
    return c;
}

void ModelParams::validate() const {
    config.validate();
    if (static_cast<int>(cells.size()) != config.rnn_layers ||
        static_cast<int>(rnn_bn.size()) != config.rnn_layers)
        throw ShapeError("layer count disagrees with config");
    for (int l = 0; l < config.rnn_layers; ++l) {
        const CellParams& c = cells[static_cast<std::size_t>(l)];
        if (c.kind != config.cell)
            throw ShapeError("cell kind disagrees with config");
        c.validate();
        if (c.hidden() != config.hidden)
            throw ShapeError("hidden size disagrees with config");
        int expect_in = l == 0 ? config.input : config.hidden;
        if (c.input() != expect_in)
            throw ShapeError("layer " + std::to_string(l) + " input width " +
                             std::to_string(c.input()) + ", expected " +
                             std::to_string(expect_in));
        if (rnn_bn[static_cast<std::size_t>(l)].features() != config.hidden)
            throw ShapeError("recurrent batch-norm width disagrees with hidden size");
    }
    if (dense_w.rows() != config.dense || dense_w.cols() != config.hidden ||
        dense_b.size() != config.dense)
        throw ShapeError("dense layer shape disagrees with config");
    if (dense_bn.features() != config.dense)
        throw ShapeError("dense batch-norm width disagrees with config");
    if (out_w.size() != config.dense)
        throw ShapeError("output layer width disagrees with config");
}

ModelParams build_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    ModelParams m;
    m.config = cfg;
    for (int l = 0; l < cfg.rnn_layers; ++l) {
        int in = l == 0 ? cfg.input : cfg.hidden;
        m.cells.push_back(init_cell(cfg.cell, in, cfg.hidden, rng));
        m.rnn_bn.push_back(BnParams::identity(cfg.hidden));
    }
    double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    m.dense_w = Mat(cfg.dense, cfg.hidden);
    for (Eigen::Index i = 0; i < m.dense_w.size(); ++i)
        m.dense_w.data()[i] = rng.uniform(-bound, bound);
    m.dense_b = Vec::Zero(cfg.dense);
    m.dense_bn = BnParams::identity(cfg.dense);
    double obound = 1.0 / std::sqrt(static_cast<double>(cfg.dense));
    m.out_w = Vec(cfg.dense);
    for (Eigen::Index i = 0; i < m.out_w.size(); ++i)
        m.out_w[i] = rng.uniform(-obound, obound);
    m.out_b = 0.0;
    return m;
}

double infer_forward(const ModelParams& m, const MatRef& window) {
    if (window.cols() != m.config.input)
        throw ShapeError("window width " + std::to_string(window.cols()) + ", model expects " +
                         std::to_string(m.config.input));
    if (window.rows() < 1)
        throw ShapeError("window must contain at least one timestep");
    const auto T = window.rows();
    const int L = m.config.rnn_layers;
    Mat seq = window;
    Mat h_final;
    for (int l = 0; l < L; ++l) {
        const CellParams& cell = m.cells[static_cast<std::size_t>(l)];
        const BnParams& bn = m.rnn_bn[static_cast<std::size_t>(l)];
        Mat h = Mat::Zero(1, m.config.hidden);
        Mat c = Mat::Zero(1, m.config.hidden);
        bool last = l == L - 1;
        Mat outseq;
        if (!last)
            outseq.resize(T, m.config.hidden);
        for (Eigen::Index t = 0; t < T; ++t) {
            h = cell_step(cell, seq.row(t), h, &c, nullptr);
            if (!last)
                outseq.row(t) = h;
        }
        if (last)
            h_final = batchnorm_infer(bn, h);
        else
            seq = batchnorm_infer(bn, outseq);
    }
    Mat d = dense_forward(h_final, m.dense_w, m.dense_b, Act::Linear);
    d = batchnorm_infer(m.dense_bn, d);
    d = activate(Act::ReLU, d);
    double logit = (d * m.out_w)(0) + m.out_b;
    return sigmoid(logit);
}

bool classify(double p_attack, double threshold) { return p_attack >= threshold; }

Prediction predict(const ModelParams& m, const MatRef& window, std::uint64_t origin) {
    double p = infer_forward(m, window);
    return {p, classify(p, m.config.threshold), origin};
}

std::size_t param_count(const ModelParams& m) {
    std::size_t n = 0;
    for (const auto& c : m.cells)
        n += cell_param_count(c);
    for (const auto& bn : m.rnn_bn)
        n += static_cast<std::size_t>(bn.gamma.size() + bn.beta.size());
    n += static_cast<std::size_t>(m.dense_w.size() + m.dense_b.size());
    n += static_cast<std::size_t>(m.dense_bn.gamma.size() + m.dense_bn.beta.size());
    n += static_cast<std::size_t>(m.out_w.size()) + 1;
    return n;
}

} // namespace edet
