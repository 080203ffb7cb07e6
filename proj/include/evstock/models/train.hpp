#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "evstock/common/errors.hpp"
#include "evstock/common/rng.hpp"
#include "evstock/models/ebcnn.hpp"
#include "evstock/models/lstm_models.hpp"
#include "evstock/models/sample.hpp"
#include "evstock/nnkit/adam.hpp"

namespace evstock::models {

enum class ModelKind { full, shortterm, lstm, forecast };

inline ModelKind model_kind_from_string(const std::string& name) {
    if (name == "full") return ModelKind::full;
    if (name == "short") return ModelKind::shortterm;
    if (name == "lstm") return ModelKind::lstm;
    if (name == "forecast") return ModelKind::forecast;
    throw UsageError("unknown model '" + name + "', expected full|short|lstm|forecast");
}

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 50;
    double learning_rate = 0.001;
    bool shuffle = false; // reshuffle the visit order each epoch
    std::uint64_t seed = 0;
};

struct AccuracyCurves {
    std::vector<double> train;
    std::vector<double> test;
};

/// Cross-entropy classifier on the full month/week/day network.
class FullNetwork {
public:
    FullNetwork(const EbcnnConfig& config, Rng& rng) : params_(EbcnnParams::init(config, rng)) {}
    explicit FullNetwork(EbcnnParams params) : params_(std::move(params)) {}

    TensorPtr loss(const AlignedSample& sample) const {
        return nnkit::nll(ebcnn_forward_t(sample, params_),
                          static_cast<std::size_t>(sample.label));
    }
    int predict(const AlignedSample& sample) const {
        auto y = ebcnn_forward(sample, params_);
        return y[1] >= y[0] ? 1 : 0;
    }
    std::vector<TensorPtr> parameters() const { return params_.parameters(); }
    const EbcnnParams& params() const { return params_; }

private:
    EbcnnParams params_;
};

/// Reference network on the day embedding alone.
class ShortTermNetwork {
public:
    ShortTermNetwork(const ShortTermConfig& config, Rng& rng)
        : params_(ShortTermParams::init(config, rng)) {}
    explicit ShortTermNetwork(ShortTermParams params) : params_(std::move(params)) {}

    TensorPtr loss(const AlignedSample& sample) const {
        return nnkit::nll(shortterm_forward_t(sample.day_embedding, params_),
                          static_cast<std::size_t>(sample.label));
    }
    int predict(const AlignedSample& sample) const {
        auto y = shortterm_forward(sample.day_embedding, params_);
        return y[1] >= y[0] ? 1 : 0;
    }
    std::vector<TensorPtr> parameters() const { return params_.parameters(); }
    const ShortTermParams& params() const { return params_; }

private:
    ShortTermParams params_;
};

/// LSTM over the sample's event sequence with a binary cross-entropy head.
class EventSequenceClassifier {
public:
    EventSequenceClassifier(std::size_t input_dim, std::size_t hidden, Rng& rng)
        : params_(LstmClassifierParams::init(input_dim, hidden, rng)) {}

    TensorPtr loss(const AlignedSample& sample) const {
        auto seq = classifier_sequence(sample);
        return nnkit::bce_with_logits(lstm_classify_logit_t(seq, params_),
                                      static_cast<double>(sample.label));
    }
    int predict(const AlignedSample& sample) const {
        auto seq = classifier_sequence(sample);
        return lstm_classify(seq, params_) >= 0.5 ? 1 : 0;
    }
    std::vector<TensorPtr> parameters() const { return params_.parameters(); }
    const LstmClassifierParams& params() const { return params_; }

private:
    LstmClassifierParams params_;
};

template <class Net>
double classifier_accuracy(const Net& net, std::span<const AlignedSample> samples) {
    if (samples.empty()) throw DataError("classifier_accuracy: no samples");
    std::size_t hits = 0;
    for (const auto& s : samples) {
        if (net.predict(s) == s.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

/// Mini-batch Adam with per-epoch train/test accuracy curves. Without
/// shuffling the visit order is the (chronological) input order; with it,
/// the order is re-permuted each epoch from the seed. Membership never
/// changes either way.
template <class Net>
AccuracyCurves train_classifier(Net& net, std::span<const AlignedSample> train,
                                std::span<const AlignedSample> test, const TrainConfig& config) {
    if (train.empty()) throw DataError("train_classifier: empty training set");
    if (test.empty()) throw DataError("train_classifier: empty test set");

    auto params = net.parameters();
    auto adam = nnkit::AdamState::create(params, config.learning_rate);
    Rng shuffle_rng = Rng(config.seed).derive("train-shuffle");

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    AccuracyCurves curves;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            nnkit::zero_grad(params);
            for (std::size_t i = start; i < stop; ++i) {
                auto loss = net.loss(train[order[i]]);
                if (!std::isfinite(loss->data[0])) {
                    throw NumericError("train_classifier: non-finite loss at epoch " +
                                       std::to_string(epoch));
                }
                nnkit::backward(loss);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (const auto& p : params) {
                for (double& g : p->grad) g *= inv;
            }
            nnkit::adam_step(params, adam);
        }
        curves.train.push_back(classifier_accuracy(net, train));
        curves.test.push_back(classifier_accuracy(net, test));
    }
    return curves;
}

struct ForecastTrainResult {
    std::vector<double> epoch_mse; // mean training MSE per epoch
};

/// Same loop for the forecaster, tracking mean squared error.
inline ForecastTrainResult train_forecaster(ForecasterParams& params,
                                            std::span<const ForecastWindow> train,
                                            const TrainConfig& config) {
    if (train.empty()) throw DataError("train_forecaster: empty training set");
    auto tensors = params.parameters();
    auto adam = nnkit::AdamState::create(tensors, config.learning_rate);

    ForecastTrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
            const std::size_t stop = std::min(train.size(), start + config.batch_size);
            nnkit::zero_grad(tensors);
            for (std::size_t i = start; i < stop; ++i) {
                auto loss = forecast_loss_t(train[i], params);
                if (!std::isfinite(loss->data[0])) {
                    throw NumericError("train_forecaster: non-finite loss at epoch " +
                                       std::to_string(epoch));
                }
                epoch_loss += loss->data[0];
                nnkit::backward(loss);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (const auto& p : tensors) {
                for (double& g : p->grad) g *= inv;
            }
            nnkit::adam_step(tensors, adam);
        }
        result.epoch_mse.push_back(epoch_loss / static_cast<double>(train.size()));
    }
    return result;
}

inline double forecast_mse(const ForecasterParams& params,
                           std::span<const ForecastWindow> windows) {
    if (windows.empty()) throw DataError("forecast_mse: no windows");
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& w : windows) {
        auto pred = lstm_forecast(w, params);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double diff = pred[i] - w.targets[i];
            total += diff * diff;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace evstock::models
