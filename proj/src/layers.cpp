#include "edet/layers.hpp"

#include "edet/errors.hpp"

namespace edet {

BnParams BnParams::identity(int features) {
    BnParams p;
    p.gamma = Vec::Ones(features);
    p.beta = Vec::Zero(features);
    p.running_mean = Vec::Zero(features);
    p.running_var = Vec::Ones(features);
    return p;
}

Mat batchnorm_train(BnParams& p, const Mat& x, BnCache& cache) {
    if (x.rows() < 2)
        throw ShapeError("batch norm in train mode needs a batch of at least 2, got " +
                         std::to_string(x.rows()));
    if (x.cols() != p.gamma.size())
        throw ShapeError("batch norm feature width mismatch");
    const double n = static_cast<double>(x.rows());
    Vec mean = x.colwise().sum().transpose() / n;
    Mat centered = x.rowwise() - mean.transpose();
    Vec var = (centered.array().square().colwise().sum() / n).matrix().transpose();
    cache.inv_std = (var.array() + kBnEps).rsqrt().matrix();
    cache.xhat = (centered.array().rowwise() * cache.inv_std.transpose().array()).matrix();
    p.running_mean = kBnMomentum * p.running_mean + (1.0 - kBnMomentum) * mean;
    p.running_var = kBnMomentum * p.running_var + (1.0 - kBnMomentum) * var;
    Mat out = (cache.xhat.array().rowwise() * p.gamma.transpose().array()).matrix();
    out.rowwise() += p.beta.transpose();
    return out;
}

Mat batchnorm_infer(const BnParams& p, const Mat& x) {
    if (x.cols() != p.gamma.size())
        throw ShapeError("batch norm feature width mismatch");
    Vec inv = (p.running_var.array() + kBnEps).rsqrt().matrix();
    Mat out = ((x.rowwise() - p.running_mean.transpose()).array().rowwise() *
               (inv.array() * p.gamma.array()).transpose())
                  .matrix();
    out.rowwise() += p.beta.transpose();
    return out;
}

Mat batchnorm_backward(const BnParams& p, const BnCache& cache, const Mat& dy, BnGrads& g) {
    const double n = static_cast<double>(dy.rows());
    g.gamma += (dy.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
    g.beta += dy.colwise().sum().transpose();
    Mat dxhat = (dy.array().rowwise() * p.gamma.transpose().array()).matrix();
    Vec mean_dxhat = dxhat.colwise().sum().transpose() / n;
    Vec mean_dxhat_xhat =
        (dxhat.array() * cache.xhat.array()).colwise().sum().matrix().transpose() / n;
    Mat dx = ((dxhat.rowwise() - mean_dxhat.transpose()).array() -
              cache.xhat.array().rowwise() * mean_dxhat_xhat.transpose().array())
                 .matrix();
    dx = (dx.array().rowwise() * cache.inv_std.transpose().array()).matrix();
    return dx;
}

Mat dense_forward(const Mat& x, const Mat& weights, const Vec& bias, Act act) {
    if (x.cols() != weights.cols())
        throw ShapeError("dense layer: input width " + std::to_string(x.cols()) +
                         ", weights expect " + std::to_string(weights.cols()));
    if (bias.size() != weights.rows())
        throw ShapeError("dense layer: bias length disagrees with output width");
    Mat pre = x * weights.transpose();
    pre.rowwise() += bias.transpose();
    return activate(act, pre);
}

} // namespace edet
