#include "edet/tensor.hpp"

#include <cmath>

#include "edet/errors.hpp"

namespace edet {

bool all_finite(const Mat& m) { return m.allFinite(); }
bool all_finite(const Vec& v) { return v.allFinite(); }

Mat tensor_from_f32(Eigen::Index rows, Eigen::Index cols, std::span<const float> data,
                    bool checked) {
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != data.size())
        throw ShapeError("tensor data length does not match rows*cols");
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < rows * cols; ++i) {
        double v = static_cast<double>(data[static_cast<std::size_t>(i)]);
        if (checked && !std::isfinite(v))
            throw TensorError("non-finite value in tensor data");
        out.data()[i] = v;
    }
    return out;
}

double Rng::normal(double mean, double sd) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + sd * spare_;
    }
    // Box-Muller on two uniforms; u clamped away from 0 so log stays finite.
    double u = uniform();
    if (u < 1e-300) u = 1e-300;
    double v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    double theta = 2.0 * 3.14159265358979323846 * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + sd * r * std::cos(theta);
}

} // namespace edet
