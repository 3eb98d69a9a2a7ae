#pragma once

#include <functional>
#include <span>
#include <vector>

#include "edet/features.hpp"
#include "edet/model.hpp"

namespace edet {

inline constexpr double kBceClampLo = 1e-7;
inline constexpr double kBceClampHi = 1.0 - 1e-7;

/// One training batch in timestep-major form: x[t] is the B x input slab of
/// timestep t across the batch; y holds the B labels.
struct Batch {
    std::vector<Mat> x;
    Vec y;

    Eigen::Index size() const { return x.empty() ? 0 : x[0].rows(); }
};

Batch gather_batch(const WindowSet& ws, std::span<const std::size_t> indices);

struct ModelGrads {
    std::vector<CellGrads> cells;
    std::vector<BnGrads> rnn_bn;
    Mat dense_w;
    Vec dense_b;
    BnGrads dense_bn;
    Vec out_w;
    double out_b = 0.0;
};

ModelGrads make_grads(const ModelParams& m);
void zero(ModelGrads& g);

/// Binary cross-entropy with the probability clamped to
/// [kBceClampLo, kBceClampHi] before the logs. The optional derivative is
/// exact for the clamped function: zero wherever the clamp is active.
double bce(double p, double y, double* dp = nullptr);

/// Train-mode forward plus full backpropagation through time for one batch.
/// Returns the (optionally positive-class-weighted) mean loss; gradients of
/// that loss land in g, which is zeroed first. Batch-norm running statistics
/// update as a side effect. Throws NonFiniteLoss with the offending batch
/// index if any per-window loss is not finite.
double forward_backward(ModelParams& m, const Batch& batch, ModelGrads& g,
                        double pos_weight = 1.0);

/// Visit every trainable span in a fixed order: per layer W, U, b, scalars,
/// bn gamma, bn beta; then dense W, dense b, dense bn gamma/beta, output
/// weights, output bias. Optimizers rely on this order being stable.
void visit_params(ModelParams& m, ModelGrads& g,
                  const std::function<void(double*, double*, std::size_t)>& f);

} // namespace edet
