#pragma once

#include "edet/activations.hpp"
#include "edet/tensor.hpp"

namespace edet {

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.9;

/// gamma/beta are trainable; the running statistics are state updated in
/// train mode and consumed in infer mode.
struct BnParams {
    Vec gamma, beta, running_mean, running_var;

    static BnParams identity(int features);
    int features() const { return static_cast<int>(gamma.size()); }
};

struct BnGrads {
    Vec gamma, beta;
};

struct BnCache {
    Mat xhat;
    Vec inv_std;
};

/// Train mode: normalize x (batch x features) with batch statistics (biased
/// variance), update running stats as momentum*running + (1-momentum)*batch.
/// Throws ShapeError when the batch has fewer than 2 rows.
Mat batchnorm_train(BnParams& p, const Mat& x, BnCache& cache);

Mat batchnorm_infer(const BnParams& p, const Mat& x);

/// dy -> dx given the cache of the corresponding train-mode call; accumulates
/// gamma/beta gradients.
Mat batchnorm_backward(const BnParams& p, const BnCache& cache, const Mat& dy, BnGrads& g);

/// act(x W^T + b): x is batch x in, weights out x in, bias out.
Mat dense_forward(const Mat& x, const Mat& weights, const Vec& bias, Act act);

} // namespace edet
