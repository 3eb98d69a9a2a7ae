#pragma once

#include <cmath>

#include "edet/tensor.hpp"

namespace edet {

enum class Act { Tanh, ReLU, Sigmoid, Linear };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Mat activate(Act kind, const Mat& x) {
    switch (kind) {
    case Act::Tanh: return x.array().tanh().matrix();
    case Act::ReLU: return x.array().max(0.0).matrix();
    case Act::Sigmoid: return (1.0 + (-x.array()).exp()).inverse().matrix();
    case Act::Linear: return x;
    }
    return x;
}

/// Derivative of the activation expressed through its own output y = act(x).
inline Mat activation_grad(Act kind, const Mat& y) {
    switch (kind) {
    case Act::Tanh: return (1.0 - y.array().square()).matrix();
    case Act::ReLU: return (y.array() > 0.0).cast<double>().matrix();
    case Act::Sigmoid: return (y.array() * (1.0 - y.array())).matrix();
    case Act::Linear: return Mat::Ones(y.rows(), y.cols());
    }
    return Mat::Ones(y.rows(), y.cols());
}

} // namespace edet
