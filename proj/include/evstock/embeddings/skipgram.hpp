#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evstock/common/errors.hpp"
#include "evstock/common/rng.hpp"
#include "evstock/embeddings/vocab.hpp"

namespace evstock::embeddings {

/// |V| x dim row-major embedding matrix.
struct WordEmbeddings {
    std::size_t dim = 0;
    std::vector<double> table;

    std::size_t vocab_size() const { return dim == 0 ? 0 : table.size() / dim; }
    std::span<const double> row(std::size_t index) const {
        return {table.data() + index * dim, dim};
    }
    std::span<double> row(std::size_t index) { return {table.data() + index * dim, dim}; }
};

struct SkipgramConfig {
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;     // decays linearly to min_learning_rate
    double min_learning_rate = 1e-4;
    std::uint64_t seed = 0;
};

/// Loss and gradients for one (center, context, negatives) draw:
///   -log s(v.u_o) - sum_n log s(-v.u_n)
struct SgnsGrad {
    double loss = 0.0;
    std::vector<double> d_center;
    std::vector<double> d_context;
    std::vector<std::vector<double>> d_negatives;
};

namespace detail {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double log_sigmoid(double x) {
    // -log(1 + e^{-x}) computed stably
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

} // namespace detail

/// The one gradient used by both the trainer and the gradient-check suite.
inline SgnsGrad sgns_pair_grad(std::span<const double> center, std::span<const double> context,
                               const std::vector<std::vector<double>>& negatives) {
    const std::size_t d = center.size();
    SgnsGrad g;
    g.d_center.assign(d, 0.0);
    g.d_context.assign(d, 0.0);
    g.d_negatives.assign(negatives.size(), std::vector<double>(d, 0.0));

    double dot_pos = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot_pos += center[i] * context[i];
    g.loss = -detail::log_sigmoid(dot_pos);
    const double coeff_pos = detail::sigmoid(dot_pos) - 1.0; // d(-log s(x))/dx
    for (std::size_t i = 0; i < d; ++i) {
        g.d_center[i] += coeff_pos * context[i];
        g.d_context[i] += coeff_pos * center[i];
    }

    for (std::size_t n = 0; n < negatives.size(); ++n) {
        double dot_neg = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot_neg += center[i] * negatives[n][i];
        g.loss += -detail::log_sigmoid(-dot_neg);
        const double coeff_neg = detail::sigmoid(dot_neg); // d(-log s(-x))/dx
        for (std::size_t i = 0; i < d; ++i) {
            g.d_center[i] += coeff_neg * negatives[n][i];
            g.d_negatives[n][i] += coeff_neg * center[i];
        }
    }
    return g;
}

/// Cumulative unigram^0.75 table for negative sampling.
class NoiseDistribution {
public:
    explicit NoiseDistribution(const Vocabulary& vocab) {
        cumulative_.reserve(vocab.size());
        double total = 0.0;
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            total += std::pow(static_cast<double>(vocab.frequency(i)), 0.75);
            cumulative_.push_back(total);
        }
    }

    std::size_t sample(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    }

private:
    std::vector<double> cumulative_;
};

struct SkipgramResult {
    WordEmbeddings embeddings;
    std::vector<double> epoch_loss; // mean pair loss per epoch
};

/// Skip-gram with negative sampling over the tokenized corpus. Sentences are
/// mapped to vocabulary indices (out-of-vocabulary tokens dropped), the
/// context window shrinks uniformly per center word as in the classic
/// implementation, and everything is deterministic under the seed.
inline SkipgramResult train_skipgram_full(std::span<const std::vector<std::string>> corpus,
                                          const Vocabulary& vocab, const SkipgramConfig& config) {
    if (config.dim == 0) throw DataError("train_skipgram: dimension must be positive");
    if (vocab.size() == 0) throw DataError("train_skipgram: empty vocabulary");

    Rng rng(config.seed);
    WordEmbeddings input;
    input.dim = config.dim;
    input.table.resize(vocab.size() * config.dim);
    const double r = 0.5 / static_cast<double>(config.dim);
    for (double& v : input.table) v = rng.uniform(-r, r);
    std::vector<double> output(vocab.size() * config.dim, 0.0);

    std::vector<std::vector<std::size_t>> indexed;
    std::size_t positions = 0;
    for (const auto& sentence : corpus) {
        std::vector<std::size_t> ids;
        for (const auto& word : sentence) {
            if (auto idx = vocab.index_of(word)) ids.push_back(*idx);
        }
        positions += ids.size();
        indexed.push_back(std::move(ids));
    }

    SkipgramResult result;
    if (positions == 0 || config.epochs == 0) {
        result.embeddings = std::move(input);
        return result;
    }

    NoiseDistribution noise(vocab);
    const double total_steps = static_cast<double>(config.epochs * positions);
    std::size_t step = 0;
    std::vector<std::vector<double>> negatives(config.negatives,
                                               std::vector<double>(config.dim));
    std::vector<std::size_t> negative_ids(config.negatives);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t pairs = 0;
        for (const auto& ids : indexed) {
            for (std::size_t center_pos = 0; center_pos < ids.size(); ++center_pos) {
                const double progress = static_cast<double>(step++) / total_steps;
                const double lr = std::max(config.min_learning_rate,
                                           config.learning_rate * (1.0 - progress));
                const std::size_t shrink = config.window == 0
                                               ? 0
                                               : static_cast<std::size_t>(
                                                     rng.uniform_int(config.window));
                const std::size_t span = config.window - shrink;
                const std::size_t lo = center_pos >= span ? center_pos - span : 0;
                const std::size_t hi = std::min(ids.size(), center_pos + span + 1);
                for (std::size_t ctx_pos = lo; ctx_pos < hi; ++ctx_pos) {
                    if (ctx_pos == center_pos) continue;
                    const std::size_t center_id = ids[center_pos];
                    const std::size_t context_id = ids[ctx_pos];
                    for (std::size_t n = 0; n < config.negatives; ++n) {
                        std::size_t neg = noise.sample(rng);
                        if (neg == context_id) neg = (neg + 1) % vocab.size();
                        negative_ids[n] = neg;
                        const double* src = output.data() + neg * config.dim;
                        std::copy(src, src + config.dim, negatives[n].begin());
                    }
                    auto grad = sgns_pair_grad(
                        input.row(center_id),
                        {output.data() + context_id * config.dim, config.dim}, negatives);
                    epoch_loss += grad.loss;
                    ++pairs;
                    double* vc = input.table.data() + center_id * config.dim;
                    double* uo = output.data() + context_id * config.dim;
                    for (std::size_t i = 0; i < config.dim; ++i) {
                        vc[i] -= lr * grad.d_center[i];
                        uo[i] -= lr * grad.d_context[i];
                    }
                    for (std::size_t n = 0; n < config.negatives; ++n) {
                        double* un = output.data() + negative_ids[n] * config.dim;
                        for (std::size_t i = 0; i < config.dim; ++i) {
                            un[i] -= lr * grad.d_negatives[n][i];
                        }
                    }
                }
            }
        }
        result.epoch_loss.push_back(pairs == 0 ? 0.0 : epoch_loss / static_cast<double>(pairs));
    }
    result.embeddings = std::move(input);
    return result;
}

inline WordEmbeddings train_skipgram(std::span<const std::vector<std::string>> corpus,
                                     const Vocabulary& vocab, const SkipgramConfig& config) {
    return train_skipgram_full(corpus, vocab, config).embeddings;
}

} // namespace evstock::embeddings
