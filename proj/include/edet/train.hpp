#pragma once

#include <cstdint>
#include <vector>

#include "edet/bptt.hpp"

namespace edet {

enum class Optimizer { Adam, SGD };

struct TrainConfig {
    int epochs = 20;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double lr_decay = 1.0;
    std::uint64_t seed = 1;
    int patience = 5;
    Optimizer optimizer = Optimizer::Adam;
    double val_fraction = 0.10;
    double pos_weight = 1.0;

    void validate() const; // throws SpecError
};

struct EpochStats {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double learning_rate = 0.0;
};

struct TrainResult {
    ModelParams model;
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

/// Mini-batch BPTT with a stratified validation split and early stopping on
/// validation loss (patience in epochs); the best-validation snapshot is what
/// comes back. Deterministic for a fixed seed. Trailing batches smaller than
/// 2 windows are dropped (batch-norm needs a real batch).
TrainResult train_model(ModelParams model, const WindowSet& data, const TrainConfig& cfg);

} // namespace edet
