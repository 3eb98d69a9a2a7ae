#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "edet/bptt.hpp"
#include "edet/cells.hpp"
#include "edet/features.hpp"
#include "edet/model.hpp"
#include "edet/tensor.hpp"

namespace testutil {

/// Self-deleting scratch directory for round-trip tests.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "edet_test_XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data()))
            throw std::runtime_error("mkdtemp failed");
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

inline void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// O(n^2) reference AUC: wins + half-ties over all positive/negative pairs.
inline double brute_auc(std::span<const double> scores, std::span<const int> labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1)
            continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0)
                continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

inline double rel_err(double analytic, double reference) {
    return std::abs(analytic - reference) / std::max(1.0, std::abs(reference));
}

/// Random windows with random labels; not linearly separable, just shaped.
inline edet::WindowSet random_windows(std::size_t m, int T, int width, std::uint64_t seed) {
    edet::Rng rng(seed);
    edet::Mat rows(static_cast<Eigen::Index>(m), width);
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = 0; j < rows.cols(); ++j)
            rows(i, j) = rng.uniform();
    std::vector<std::uint8_t> labels(m);
    for (auto& l : labels)
        l = static_cast<std::uint8_t>(rng.below(2));
    return edet::make_windows(std::move(rows), std::move(labels), T);
}

/// Sum of final hidden state weighted by a fixed random matrix; a scalar loss
/// that exercises every output coordinate of a cell.
struct CellLossProbe {
    edet::Mat M; // B x hidden weights

    double forward(const edet::CellParams& p, const std::vector<edet::Mat>& xs,
                   const edet::Mat& h0) const {
        edet::Mat h = h0;
        edet::Mat c = edet::Mat::Zero(h0.rows(), h0.cols());
        for (const auto& x : xs)
            h = edet::cell_step(p, x, h, &c, nullptr);
        return (h.array() * M.array()).sum();
    }
};

/// Analytic gradients of CellLossProbe via the reverse-mode step.
inline edet::CellGrads cell_probe_gradients(const edet::CellParams& p,
                                            const std::vector<edet::Mat>& xs,
                                            const edet::Mat& h0, const edet::Mat& M,
                                            std::vector<edet::Mat>* dxs = nullptr) {
    std::vector<edet::CellCache> caches(xs.size());
    edet::Mat h = h0;
    edet::Mat c = edet::Mat::Zero(h0.rows(), h0.cols());
    for (std::size_t t = 0; t < xs.size(); ++t)
        h = edet::cell_step(p, xs[t], h, &c, &caches[t]);

    edet::CellGrads g = edet::make_cell_grads(p);
    edet::Mat dh = M;
    edet::Mat dc = edet::Mat::Zero(h0.rows(), h0.cols());
    if (dxs)
        dxs->assign(xs.size(), edet::Mat());
    for (std::size_t t = xs.size(); t-- > 0;) {
        edet::Mat dx;
        dh = edet::cell_backward_step(p, xs[t], caches[t], dh, &dc, g,
                                      dxs ? &(*dxs)[t] : &dx);
    }
    return g;
}

} // namespace testutil
