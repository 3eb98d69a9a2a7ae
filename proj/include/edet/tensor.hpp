#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace edet {

// Row-major throughout: window rows are timesteps, batch rows are windows,
// and serialized tensor data is read/written without transposition.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using MatRef = Eigen::Ref<const Mat>;
using MatMap = Eigen::Map<const Mat>;

bool all_finite(const Mat& m);
bool all_finite(const Vec& v);

/// Build a matrix from raw row-major f32 data, widening to f64.
/// With checked=true, NaN/Inf values throw TensorError.
Mat tensor_from_f32(Eigen::Index rows, Eigen::Index cols, std::span<const float> data,
                    bool checked);

/// Deterministic RNG. mt19937_64 output is fully specified by the standard and
/// the derived draws below avoid std distributions, whose sequences are
/// implementation-defined; results are therefore reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased-enough integer in [0, n) via 128-bit multiply-shift.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

    /// Box-Muller, one spare cached.
    double normal(double mean, double sd);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace edet
