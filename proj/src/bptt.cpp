#include "edet/bptt.hpp"

#include <algorithm>
#include <cmath>

#include "edet/errors.hpp"

namespace edet {

Batch gather_batch(const WindowSet& ws, std::span<const std::size_t> indices) {
    const int T = ws.window_len();
    const int W = ws.width();
    const auto B = static_cast<Eigen::Index>(indices.size());
    Batch b;
    b.x.assign(static_cast<std::size_t>(T), Mat(B, W));
    b.y = Vec(B);
    for (Eigen::Index i = 0; i < B; ++i) {
        auto win = ws.window(indices[static_cast<std::size_t>(i)]);
        for (int t = 0; t < T; ++t)
            b.x[static_cast<std::size_t>(t)].row(i) = win.row(t);
        b.y[i] = ws.label(indices[static_cast<std::size_t>(i)]);
    }
    return b;
}

ModelGrads make_grads(const ModelParams& m) {
    ModelGrads g;
    for (const auto& c : m.cells) {
        g.cells.push_back(make_cell_grads(c));
        g.rnn_bn.push_back({Vec::Zero(m.config.hidden), Vec::Zero(m.config.hidden)});
    }
    g.dense_w = Mat::Zero(m.dense_w.rows(), m.dense_w.cols());
    g.dense_b = Vec::Zero(m.dense_b.size());
    g.dense_bn = {Vec::Zero(m.config.dense), Vec::Zero(m.config.dense)};
    g.out_w = Vec::Zero(m.out_w.size());
    return g;
}

void zero(ModelGrads& g) {
    for (auto& c : g.cells)
        zero(c);
    for (auto& bn : g.rnn_bn) {
        bn.gamma.setZero();
        bn.beta.setZero();
    }
    g.dense_w.setZero();
    g.dense_b.setZero();
    g.dense_bn.gamma.setZero();
    g.dense_bn.beta.setZero();
    g.out_w.setZero();
    g.out_b = 0.0;
}

double bce(double p, double y, double* dp) {
    double pc = std::clamp(p, kBceClampLo, kBceClampHi);
    double loss = -(y * std::log(pc) + (1.0 - y) * std::log1p(-pc));
    if (dp)
        *dp = (p > kBceClampLo && p < kBceClampHi) ? (pc - y) / (pc * (1.0 - pc)) : 0.0;
    return loss;
}

double forward_backward(ModelParams& m, const Batch& batch, ModelGrads& g, double pos_weight) {
    zero(g);
    const int L = m.config.rnn_layers;
    const int T = static_cast<int>(batch.x.size());
    const Eigen::Index B = batch.size();
    const int H = m.config.hidden;
    if (T < 1)
        throw ShapeError("training batch has no timesteps");
    if (B < 2)
        throw ShapeError("training batch must hold at least 2 windows");
    if (batch.x[0].cols() != m.config.input)
        throw ShapeError("batch width disagrees with model input size");
    if (batch.y.size() != B)
        throw ShapeError("batch label count disagrees with batch size");
    if (!(pos_weight > 0.0))
        throw ShapeError("pos_weight must be positive");

    // Forward.
    std::vector<std::vector<CellCache>> caches(static_cast<std::size_t>(L));
    std::vector<std::vector<Mat>> bn_seq_out(static_cast<std::size_t>(L));
    std::vector<BnCache> seq_bn_caches(static_cast<std::size_t>(L));
    Mat h_last;
    for (int l = 0; l < L; ++l) {
        auto lu = static_cast<std::size_t>(l);
        const auto& xin = l == 0 ? batch.x : bn_seq_out[lu - 1];
        caches[lu].resize(static_cast<std::size_t>(T));
        Mat h = Mat::Zero(B, H);
        Mat c = Mat::Zero(B, H);
        bool last = l == L - 1;
        std::vector<Mat> outs;
        if (!last)
            outs.resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            auto tu = static_cast<std::size_t>(t);
            h = cell_step(m.cells[lu], xin[tu], h, &c, &caches[lu][tu]);
            if (!last)
                outs[tu] = h;
        }
        if (last) {
            h_last = std::move(h);
        } else {
            Mat cat(B * T, H);
            for (int t = 0; t < T; ++t)
                cat.middleRows(static_cast<Eigen::Index>(t) * B, B) =
                    outs[static_cast<std::size_t>(t)];
            Mat catbn = batchnorm_train(m.rnn_bn[lu], cat, seq_bn_caches[lu]);
            bn_seq_out[lu].resize(static_cast<std::size_t>(T));
            for (int t = 0; t < T; ++t)
                bn_seq_out[lu][static_cast<std::size_t>(t)] =
                    catbn.middleRows(static_cast<Eigen::Index>(t) * B, B);
        }
    }
    auto lastu = static_cast<std::size_t>(L - 1);
    BnCache bn_final_cache;
    Mat h_last_bn = batchnorm_train(m.rnn_bn[lastu], h_last, bn_final_cache);

    Mat dense_pre = h_last_bn * m.dense_w.transpose();
    dense_pre.rowwise() += m.dense_b.transpose();
    BnCache dense_bn_cache;
    Mat dense_bn_out = batchnorm_train(m.dense_bn, dense_pre, dense_bn_cache);
    Mat dense_act = activate(Act::ReLU, dense_bn_out);

    Vec logits = dense_act * m.out_w;
    logits.array() += m.out_b;

    double wsum = 0.0, lsum = 0.0;
    Vec dlogit(B);
    for (Eigen::Index i = 0; i < B; ++i) {
        double pi = sigmoid(logits[i]);
        double yi = batch.y[i];
        double li = bce(pi, yi);
        if (!std::isfinite(li))
            throw NonFiniteLoss(static_cast<std::size_t>(i));
        double wi = yi > 0.5 ? pos_weight : 1.0;
        lsum += wi * li;
        wsum += wi;
        dlogit[i] = (pi > kBceClampLo && pi < kBceClampHi) ? wi * (pi - yi) : 0.0;
    }
    double mean_loss = lsum / wsum;
    dlogit /= wsum;

    // Backward.
    g.out_w += dense_act.transpose() * dlogit;
    g.out_b += dlogit.sum();
    Mat dact = dlogit * m.out_w.transpose();
    Mat dbn_out = (dact.array() * (dense_bn_out.array() > 0.0).cast<double>()).matrix();
    Mat ddense_pre = batchnorm_backward(m.dense_bn, dense_bn_cache, dbn_out, g.dense_bn);
    g.dense_w.noalias() += ddense_pre.transpose() * h_last_bn;
    g.dense_b += ddense_pre.colwise().sum().transpose();
    Mat dh_last_bn = ddense_pre * m.dense_w;
    Mat dh_last = batchnorm_backward(m.rnn_bn[lastu], bn_final_cache, dh_last_bn, g.rnn_bn[lastu]);

    std::vector<Mat> dext(static_cast<std::size_t>(T), Mat::Zero(B, H));
    dext[static_cast<std::size_t>(T - 1)] = std::move(dh_last);
    for (int l = L - 1; l >= 0; --l) {
        auto lu = static_cast<std::size_t>(l);
        const auto& xin = l == 0 ? batch.x : bn_seq_out[lu - 1];
        Mat dh_carry = Mat::Zero(B, H);
        Mat dc = Mat::Zero(B, H);
        bool need_dx = l > 0;
        std::vector<Mat> dx_seq;
        if (need_dx)
            dx_seq.resize(static_cast<std::size_t>(T));
        for (int t = T - 1; t >= 0; --t) {
            auto tu = static_cast<std::size_t>(t);
            Mat dh = dh_carry + dext[tu];
            Mat dx_t;
            dh_carry = cell_backward_step(m.cells[lu], xin[tu], caches[lu][tu], dh, &dc,
                                          g.cells[lu], need_dx ? &dx_t : nullptr);
            if (need_dx)
                dx_seq[tu] = std::move(dx_t);
        }
        if (need_dx) {
            Mat dcat(B * T, H);
            for (int t = 0; t < T; ++t)
                dcat.middleRows(static_cast<Eigen::Index>(t) * B, B) =
                    dx_seq[static_cast<std::size_t>(t)];
            Mat dprev =
                batchnorm_backward(m.rnn_bn[lu - 1], seq_bn_caches[lu - 1], dcat, g.rnn_bn[lu - 1]);
            for (int t = 0; t < T; ++t)
                dext[static_cast<std::size_t>(t)] =
                    dprev.middleRows(static_cast<Eigen::Index>(t) * B, B);
        }
    }
    return mean_loss;
}

void visit_params(ModelParams& m, ModelGrads& g,
                  const std::function<void(double*, double*, std::size_t)>& f) {
    for (std::size_t l = 0; l < m.cells.size(); ++l) {
        CellParams& c = m.cells[l];
        CellGrads& cg = g.cells[l];
        f(c.W.data(), cg.W.data(), static_cast<std::size_t>(c.W.size()));
        f(c.U.data(), cg.U.data(), static_cast<std::size_t>(c.U.size()));
        f(c.b.data(), cg.b.data(), static_cast<std::size_t>(c.b.size()));
        if (has_scalars(c.kind)) {
            f(&c.s1_raw, &cg.s1, 1);
            f(&c.s2_raw, &cg.s2, 1);
        }
        BnParams& bn = m.rnn_bn[l];
        BnGrads& bg = g.rnn_bn[l];
        f(bn.gamma.data(), bg.gamma.data(), static_cast<std::size_t>(bn.gamma.size()));
        f(bn.beta.data(), bg.beta.data(), static_cast<std::size_t>(bn.beta.size()));
    }
    f(m.dense_w.data(), g.dense_w.data(), static_cast<std::size_t>(m.dense_w.size()));
    f(m.dense_b.data(), g.dense_b.data(), static_cast<std::size_t>(m.dense_b.size()));
    f(m.dense_bn.gamma.data(), g.dense_bn.gamma.data(),
      static_cast<std::size_t>(m.dense_bn.gamma.size()));
    f(m.dense_bn.beta.data(), g.dense_bn.beta.data(),
      static_cast<std::size_t>(m.dense_bn.beta.size()));
    f(m.out_w.data(), g.out_w.data(), static_cast<std::size_t>(m.out_w.size()));
    f(&m.out_b, &g.out_b, 1);
}

} // namespace edet
