#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "edet/cells.hpp"
#include "edet/layers.hpp"

namespace edet {

struct ModelConfig {
    CellKind cell = CellKind::FastRNN;
    int rnn_layers = 1;
    int hidden = 128;
    int dense = 128;
    int input = 25;
    double threshold = 0.8;

    void validate() const; // throws SpecError
};

/// 1 recurrent layer of 128 cells, dense 128, threshold 0.8.
ModelConfig edge_detect_config(CellKind cell);
/// 4 recurrent layers of 64 cells with the same head, for parameter-count
/// comparisons against the heavier reference detector.
ModelConfig deepdefense_config(CellKind cell);

struct Prediction {
    double p_attack = 0.0;
    bool attack = false;
    std::uint64_t origin_index = 0;
};

/// Full trainable state plus the digest of the feature spec the model was
/// trained against (all-zero while untagged).
struct ModelParams {
    ModelConfig config;
    std::vector<CellParams> cells;
    std::vector<BnParams> rnn_bn;
    Mat dense_w;
    Vec dense_b;
    BnParams dense_bn;
    Vec out_w;
    double out_b = 0.0;
    std::array<std::uint8_t, 32> feature_digest{};

    void validate() const; // throws ShapeError/SpecError
};

ModelParams build_model(const ModelConfig& cfg, std::uint64_t seed);

/// Infer-mode forward over one window (T x input). Unrolls each recurrent
/// layer across the rows; intermediate layer outputs are batch-normed with
/// running stats per timestep, the final layer's last hidden state once;
/// then dense -> batch norm -> ReLU -> sigmoid scalar.
double infer_forward(const ModelParams& m, const MatRef& window);

/// Attack iff p_attack >= threshold (boundary inclusive).
bool classify(double p_attack, double threshold);

Prediction predict(const ModelParams& m, const MatRef& window, std::uint64_t origin);

/// Count of trainable scalars (running statistics excluded).
std::size_t param_count(const ModelParams& m);

} // namespace edet
