#include "edet/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edet/errors.hpp"

namespace edet {

void TrainConfig::validate() const {
    if (epochs < 1)
        throw SpecError("epochs must be at least 1");
    if (batch_size < 2)
        throw SpecError("batch_size must be at least 2 (batch norm needs a real batch)");
    if (learning_rate < 0.0)
        throw SpecError("learning_rate must be non-negative");
    if (!(lr_decay > 0.0))
        throw SpecError("lr_decay must be positive");
    if (patience < 1)
        throw SpecError("early_stop_patience must be at least 1");
    if (!(val_fraction >= 0.0 && val_fraction <= 0.9))
        throw SpecError("val_fraction must lie in [0, 0.9]");
    if (!(pos_weight > 0.0))
        throw SpecError("pos_weight must be positive");
}

namespace {

class AdamState {
public:
    AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(ModelParams& model, ModelGrads& g, double lr) {
        static constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t_;
        double c1 = 1.0 - std::pow(b1, t_);
        double c2 = 1.0 - std::pow(b2, t_);
        std::size_t off = 0;
        visit_params(model, g, [&](double* p, double* gr, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                double gi = gr[i];
                double& mi = m_[off + i];
                double& vi = v_[off + i];
                mi = b1 * mi + (1.0 - b1) * gi;
                vi = b2 * vi + (1.0 - b2) * gi * gi;
                p[i] -= lr * (mi / c1) / (std::sqrt(vi / c2) + eps);
            }
            off += n;
        });
    }

private:
    std::vector<double> m_, v_;
    int t_ = 0;
};

void sgd_step(ModelParams& model, ModelGrads& g, double lr) {
    visit_params(model, g, [&](double* p, double* gr, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i)
            p[i] -= lr * gr[i];
    });
}

struct ValScore {
    double loss = std::numeric_limits<double>::quiet_NaN();
    double accuracy = std::numeric_limits<double>::quiet_NaN();
};

ValScore score_validation(const ModelParams& m, const WindowSet& ws,
                          const std::vector<std::size_t>& idx) {
    ValScore s;
    if (idx.empty())
        return s;
    std::vector<double> losses;
    losses.reserve(idx.size());
    std::size_t correct = 0;
    for (std::size_t i : idx) {
        double p = infer_forward(m, ws.window(i));
        int y = ws.label(i);
        losses.push_back(bce(p, y));
        if (classify(p, m.config.threshold) == (y == 1))
            ++correct;
    }
    std::sort(losses.begin(), losses.end());
    double sum = 0.0;
    for (double l : losses)
        sum += l;
    s.loss = sum / static_cast<double>(losses.size());
    s.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
    return s;
}

} // namespace

TrainResult train_model(ModelParams model, const WindowSet& data, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (data.width() != model.config.input)
        throw ShapeError("window width " + std::to_string(data.width()) + ", model expects " +
                         std::to_string(model.config.input));

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.count(); ++i)
        (data.label(i) == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw TrainError(0, "training data holds a single class");

    Rng rng(cfg.seed);
    rng.shuffle(pos);
    rng.shuffle(neg);
    auto take_val = [&](std::size_t n) {
        if (cfg.val_fraction <= 0.0 || n < 2)
            return static_cast<std::size_t>(0);
        auto want = static_cast<std::size_t>(
            std::llround(cfg.val_fraction * static_cast<double>(n)));
        return std::clamp<std::size_t>(want, 1, n - 1);
    };
    std::size_t val_pos = take_val(pos.size());
    std::size_t val_neg = take_val(neg.size());
    std::vector<std::size_t> val_idx(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(val_pos));
    val_idx.insert(val_idx.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(val_neg));
    std::vector<std::size_t> train_idx(pos.begin() + static_cast<std::ptrdiff_t>(val_pos), pos.end());
    train_idx.insert(train_idx.end(), neg.begin() + static_cast<std::ptrdiff_t>(val_neg), neg.end());
    if (train_idx.size() < 2)
        throw TrainError(0, "not enough windows left to form a training batch");

    ModelGrads grads = make_grads(model);
    AdamState adam(param_count(model));
    double lr = cfg.learning_rate;

    TrainResult result;
    ModelParams best = model;
    double best_monitored = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int bad_epochs = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(train_idx);
        double loss_sum = 0.0;
        std::size_t window_sum = 0;
        for (std::size_t off = 0; off < train_idx.size();
             off += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                  train_idx.size() - off);
            if (n < 2)
                break;
            Batch batch = gather_batch(
                data, std::span<const std::size_t>(train_idx.data() + off, n));
            double loss;
            try {
                loss = forward_backward(model, batch, grads, cfg.pos_weight);
            } catch (const NonFiniteLoss& e) {
                throw TrainError(epoch, e.what());
            }
            if (cfg.optimizer == Optimizer::Adam)
                adam.step(model, grads, lr);
            else
                sgd_step(model, grads, lr);
            loss_sum += loss * static_cast<double>(n);
            window_sum += n;
        }
        double train_loss = loss_sum / static_cast<double>(window_sum);
        if (!std::isfinite(train_loss))
            throw TrainError(epoch, "training loss diverged");

        ValScore val = score_validation(model, data, val_idx);
        result.history.push_back({epoch, train_loss, val.loss, val.accuracy, lr});

        double monitored = val_idx.empty() ? train_loss : val.loss;
        if (monitored < best_monitored) {
            best_monitored = monitored;
            best = model;
            best_epoch = epoch;
            bad_epochs = 0;
        } else if (++bad_epochs >= cfg.patience) {
            break;
        }
        lr *= cfg.lr_decay;
    }

    result.model = std::move(best);
    result.best_epoch = best_epoch;
    return result;
}

} // namespace edet
