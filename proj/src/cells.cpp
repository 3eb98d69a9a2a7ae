#include "edet/cells.hpp"

#include <cctype>
#include <cmath>

#include "edet/activations.hpp"
#include "edet/errors.hpp"

namespace edet {

const char* to_string(CellKind kind) {
    switch (kind) {
    case CellKind::FastRNN: return "FastRNN";
    case CellKind::FastGRNN: return "FastGRNN";
    case CellKind::LSTM: return "LSTM";
    case CellKind::GRU: return "GRU";
    }
    return "unknown";
}

CellKind cell_kind_from_string(const std::string& name) {
    std::string s;
    for (char c : name)
        s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "fastrnn") return CellKind::FastRNN;
    if (s == "fastgrnn") return CellKind::FastGRNN;
    if (s == "lstm") return CellKind::LSTM;
    if (s == "gru") return CellKind::GRU;
    throw SpecError("unknown cell kind '" + name + "'");
}

int weight_blocks(CellKind kind) {
    switch (kind) {
    case CellKind::FastRNN:
    case CellKind::FastGRNN: return 1;
    case CellKind::LSTM: return 4;
    case CellKind::GRU: return 3;
    }
    return 1;
}

int bias_blocks(CellKind kind) {
    switch (kind) {
    case CellKind::FastRNN: return 1;
    case CellKind::FastGRNN: return 2;
    case CellKind::LSTM: return 4;
    case CellKind::GRU: return 3;
    }
    return 1;
}

bool has_scalars(CellKind kind) {
    return kind == CellKind::FastRNN || kind == CellKind::FastGRNN;
}

void CellParams::validate() const {
    int h = hidden();
    if (h < 1 || input() < 1)
        throw ShapeError("cell dimensions must be positive");
    auto wb = static_cast<Eigen::Index>(weight_blocks(kind)) * h;
    if (W.rows() != wb || U.rows() != wb)
        throw ShapeError("cell weight rows disagree with hidden size");
    if (b.size() != static_cast<Eigen::Index>(bias_blocks(kind)) * h)
        throw ShapeError("cell bias length disagrees with hidden size");
}

namespace {

Mat sigmoid_mat(const Mat& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

void check_step_shapes(const CellParams& p, const MatRef& x, const Mat& h_prev) {
    if (x.cols() != p.input())
        throw ShapeError("cell step: input width " + std::to_string(x.cols()) + ", expected " +
                         std::to_string(p.input()));
    if (h_prev.cols() != p.hidden() || h_prev.rows() != x.rows())
        throw ShapeError("cell step: hidden state shape mismatch");
}

} // namespace

Mat cell_step(const CellParams& p, const MatRef& x, const Mat& h_prev, Mat* c, CellCache* cache) {
    check_step_shapes(p, x, h_prev);
    const int h = p.hidden();
    switch (p.kind) {
    case CellKind::FastRNN: {
        double a = sigmoid(p.s1_raw), be = sigmoid(p.s2_raw);
        Mat pre = x * p.W.transpose() + h_prev * p.U.transpose();
        pre.rowwise() += p.b.transpose();
        Mat phi = pre.array().tanh().matrix();
        Mat out = a * phi + be * h_prev;
        if (cache) {
            cache->h_prev = h_prev;
            cache->htil = std::move(phi);
        }
        return out;
    }
    case CellKind::FastGRNN: {
        double ze = sigmoid(p.s1_raw), nu = sigmoid(p.s2_raw);
        Mat pre = x * p.W.transpose() + h_prev * p.U.transpose();
        Mat z = sigmoid_mat((pre.rowwise() + p.b.head(h).transpose()).eval());
        Mat htil = (pre.rowwise() + p.b.tail(h).transpose()).array().tanh().matrix();
        Mat out = ((ze * (1.0 - z.array()) + nu) * htil.array() + z.array() * h_prev.array())
                      .matrix();
        if (cache) {
            cache->h_prev = h_prev;
            cache->z = std::move(z);
            cache->htil = std::move(htil);
        }
        return out;
    }
    case CellKind::LSTM: {
        if (!c)
            throw ShapeError("LSTM step requires a carry state");
        if (c->rows() != x.rows() || c->cols() != h)
            throw ShapeError("LSTM carry state shape mismatch");
        Mat pre = x * p.W.transpose() + h_prev * p.U.transpose();
        pre.rowwise() += p.b.transpose();
        Mat gi = sigmoid_mat(pre.middleCols(0, h));
        Mat gf = sigmoid_mat(pre.middleCols(h, h));
        Mat gg = pre.middleCols(2 * h, h).array().tanh().matrix();
        Mat go = sigmoid_mat(pre.middleCols(3 * h, h));
        Mat c_prev = std::move(*c);
        *c = (gf.array() * c_prev.array() + gi.array() * gg.array()).matrix();
        Mat ct = c->array().tanh().matrix();
        Mat out = (go.array() * ct.array()).matrix();
        if (cache) {
            cache->h_prev = h_prev;
            cache->i = std::move(gi);
            cache->f = std::move(gf);
            cache->g = std::move(gg);
            cache->o = std::move(go);
            cache->c_prev = std::move(c_prev);
            cache->c_tanh = std::move(ct);
        }
        return out;
    }
    case CellKind::GRU: {
        auto Wb = [&](int k) { return p.W.middleRows(static_cast<Eigen::Index>(k) * h, h); };
        auto Ub = [&](int k) { return p.U.middleRows(static_cast<Eigen::Index>(k) * h, h); };
        auto bb = [&](int k) { return p.b.segment(static_cast<Eigen::Index>(k) * h, h); };
        Mat z = x * Wb(0).transpose() + h_prev * Ub(0).transpose();
        z.rowwise() += bb(0).transpose();
        z = sigmoid_mat(z);
        Mat r = x * Wb(1).transpose() + h_prev * Ub(1).transpose();
        r.rowwise() += bb(1).transpose();
        r = sigmoid_mat(r);
        Mat rh = (r.array() * h_prev.array()).matrix();
        Mat htil = x * Wb(2).transpose() + rh * Ub(2).transpose();
        htil.rowwise() += bb(2).transpose();
        htil = htil.array().tanh().matrix();
        Mat out =
            (z.array() * h_prev.array() + (1.0 - z.array()) * htil.array()).matrix();
        if (cache) {
            cache->h_prev = h_prev;
            cache->z = std::move(z);
            cache->r = std::move(r);
            cache->rh = std::move(rh);
            cache->htil = std::move(htil);
        }
        return out;
    }
    }
    throw ShapeError("unknown cell kind");
}

Mat cell_backward_step(const CellParams& p, const MatRef& x, const CellCache& cc, const Mat& dh,
                       Mat* dc, CellGrads& g, Mat* dx) {
    const int h = p.hidden();
    switch (p.kind) {
    case CellKind::FastRNN: {
        double a = sigmoid(p.s1_raw), be = sigmoid(p.s2_raw);
        const Mat& phi = cc.htil;
        g.s1 += (dh.array() * phi.array()).sum() * a * (1.0 - a);
        g.s2 += (dh.array() * cc.h_prev.array()).sum() * be * (1.0 - be);
        Mat dpre = (a * dh.array() * (1.0 - phi.array().square())).matrix();
        g.W.noalias() += dpre.transpose() * x;
        g.U.noalias() += dpre.transpose() * cc.h_prev;
        g.b += dpre.colwise().sum().transpose();
        if (dx)
            dx->noalias() = dpre * p.W;
        return dpre * p.U + be * dh;
    }
    case CellKind::FastGRNN: {
        double ze = sigmoid(p.s1_raw), nu = sigmoid(p.s2_raw);
        const Mat& z = cc.z;
        const Mat& ht = cc.htil;
        Mat dgate = (dh.array() * ht.array()).matrix();
        Mat dhtil = (dh.array() * (ze * (1.0 - z.array()) + nu)).matrix();
        Mat dz = (dh.array() * cc.h_prev.array() - ze * dgate.array()).matrix();
        g.s1 += (dgate.array() * (1.0 - z.array())).sum() * ze * (1.0 - ze);
        g.s2 += dgate.sum() * nu * (1.0 - nu);
        Mat dpre_z = (dz.array() * z.array() * (1.0 - z.array())).matrix();
        Mat dpre_h = (dhtil.array() * (1.0 - ht.array().square())).matrix();
        g.b.head(h) += dpre_z.colwise().sum().transpose();
        g.b.tail(h) += dpre_h.colwise().sum().transpose();
        Mat dpre = dpre_z + dpre_h;
        g.W.noalias() += dpre.transpose() * x;
        g.U.noalias() += dpre.transpose() * cc.h_prev;
        if (dx)
            dx->noalias() = dpre * p.W;
        return dpre * p.U + (dh.array() * z.array()).matrix();
    }
    case CellKind::LSTM: {
        if (!dc)
            throw ShapeError("LSTM backward requires a carry gradient");
        Mat dco = (dh.array() * cc.c_tanh.array()).matrix();
        Mat dcc =
            (dc->array() + dh.array() * cc.o.array() * (1.0 - cc.c_tanh.array().square()))
                .matrix();
        Mat dpre(dh.rows(), static_cast<Eigen::Index>(4) * h);
        dpre.middleCols(0, h) =
            (dcc.array() * cc.g.array() * cc.i.array() * (1.0 - cc.i.array())).matrix();
        dpre.middleCols(h, h) =
            (dcc.array() * cc.c_prev.array() * cc.f.array() * (1.0 - cc.f.array())).matrix();
        dpre.middleCols(2 * h, h) =
            (dcc.array() * cc.i.array() * (1.0 - cc.g.array().square())).matrix();
        dpre.middleCols(3 * h, h) =
            (dco.array() * cc.o.array() * (1.0 - cc.o.array())).matrix();
        *dc = (dcc.array() * cc.f.array()).matrix();
        g.W.noalias() += dpre.transpose() * x;
        g.U.noalias() += dpre.transpose() * cc.h_prev;
        g.b += dpre.colwise().sum().transpose();
        if (dx)
            dx->noalias() = dpre * p.W;
        return dpre * p.U;
    }
    case CellKind::GRU: {
        auto Wb = [&](int k) { return p.W.middleRows(static_cast<Eigen::Index>(k) * h, h); };
        auto Ub = [&](int k) { return p.U.middleRows(static_cast<Eigen::Index>(k) * h, h); };
        Mat dz = (dh.array() * (cc.h_prev.array() - cc.htil.array())).matrix();
        Mat dhtil = (dh.array() * (1.0 - cc.z.array())).matrix();
        Mat dpre_g = (dhtil.array() * (1.0 - cc.htil.array().square())).matrix();
        Mat drh = dpre_g * Ub(2);
        Mat dr = (drh.array() * cc.h_prev.array()).matrix();
        Mat dpre_z = (dz.array() * cc.z.array() * (1.0 - cc.z.array())).matrix();
        Mat dpre_r = (dr.array() * cc.r.array() * (1.0 - cc.r.array())).matrix();
        g.W.middleRows(0, h).noalias() += dpre_z.transpose() * x;
        g.W.middleRows(h, h).noalias() += dpre_r.transpose() * x;
        g.W.middleRows(2 * h, h).noalias() += dpre_g.transpose() * x;
        g.U.middleRows(0, h).noalias() += dpre_z.transpose() * cc.h_prev;
        g.U.middleRows(h, h).noalias() += dpre_r.transpose() * cc.h_prev;
        g.U.middleRows(2 * h, h).noalias() += dpre_g.transpose() * cc.rh;
        g.b.segment(0, h) += dpre_z.colwise().sum().transpose();
        g.b.segment(h, h) += dpre_r.colwise().sum().transpose();
        g.b.segment(2 * h, h) += dpre_g.colwise().sum().transpose();
        if (dx)
            dx->noalias() = dpre_z * Wb(0) + dpre_r * Wb(1) + dpre_g * Wb(2);
        return dpre_z * Ub(0) + dpre_r * Ub(1) +
               (drh.array() * cc.r.array() + dh.array() * cc.z.array()).matrix();
    }
    }
    throw ShapeError("unknown cell kind");
}

Vec fastrnn_step(const Vec& x, const Vec& h_prev, const CellParams& p) {
    if (p.kind != CellKind::FastRNN)
        throw ShapeError("fastrnn_step requires FastRNN parameters");
    Mat xr = x.transpose();
    Mat hr = h_prev.transpose();
    return Vec(cell_step(p, xr, hr, nullptr, nullptr).transpose());
}

Vec fastgrnn_step(const Vec& x, const Vec& h_prev, const CellParams& p) {
    if (p.kind != CellKind::FastGRNN)
        throw ShapeError("fastgrnn_step requires FastGRNN parameters");
    Mat xr = x.transpose();
    Mat hr = h_prev.transpose();
    return Vec(cell_step(p, xr, hr, nullptr, nullptr).transpose());
}

Vec baseline_cell_step(const Vec& x, Vec& h_prev, Vec& c, const CellParams& p) {
    if (p.kind != CellKind::LSTM && p.kind != CellKind::GRU)
        throw ShapeError("baseline_cell_step requires LSTM or GRU parameters");
    Mat xr = x.transpose();
    Mat hr = h_prev.transpose();
    Mat cr = c.transpose();
    Mat out = cell_step(p, xr, hr, p.kind == CellKind::LSTM ? &cr : nullptr, nullptr);
    if (p.kind == CellKind::LSTM)
        c = Vec(cr.transpose());
    h_prev = Vec(out.transpose());
    return h_prev;
}

std::size_t cell_param_count(const CellParams& p) {
    auto n = static_cast<std::size_t>(p.W.size() + p.U.size() + p.b.size());
    return n + (has_scalars(p.kind) ? 2 : 0);
}

CellParams init_cell(CellKind kind, int input, int hidden, Rng& rng) {
    CellParams p;
    p.kind = kind;
    double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.W = Mat(static_cast<Eigen::Index>(weight_blocks(kind)) * hidden, input);
    for (Eigen::Index i = 0; i < p.W.size(); ++i)
        p.W.data()[i] = rng.uniform(-bound, bound);
    p.U = Mat(static_cast<Eigen::Index>(weight_blocks(kind)) * hidden, hidden);
    for (Eigen::Index i = 0; i < p.U.size(); ++i)
        p.U.data()[i] = rng.uniform(-bound, bound);
    p.b = Vec::Zero(static_cast<Eigen::Index>(bias_blocks(kind)) * hidden);
    if (kind == CellKind::FastRNN) {
        p.s1_raw = -1.3862943611198906; // sigmoid -> alpha ~ 0.2
        p.s2_raw = 2.1972245773362196;  // sigmoid -> beta ~ 0.9
    } else if (kind == CellKind::FastGRNN) {
        p.s1_raw = 4.0;                 // sigmoid -> zeta ~ 0.982
        p.s2_raw = -2.9444389791664403; // sigmoid -> nu ~ 0.05
    }
    return p;
}

CellGrads make_cell_grads(const CellParams& p) {
    CellGrads g;
    g.W = Mat::Zero(p.W.rows(), p.W.cols());
    g.U = Mat::Zero(p.U.rows(), p.U.cols());
    g.b = Vec::Zero(p.b.size());
    return g;
}

void zero(CellGrads& g) {
    g.W.setZero();
    g.U.setZero();
    g.b.setZero();
    g.s1 = 0.0;
    g.s2 = 0.0;
}

} // namespace edet
