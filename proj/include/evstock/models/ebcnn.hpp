#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "evstock/common/rng.hpp"
#include "evstock/models/sample.hpp"
#include "evstock/nnkit/ops.hpp"
#include "evstock/nnkit/tensor.hpp"

namespace evstock::models {

using nnkit::TensorPtr;

struct EbcnnConfig {
    std::size_t dim = 100;
    std::size_t month_channels = 40;
    std::size_t week_channels = 20;
    std::size_t hidden = 200;
    std::size_t conv_window = 3;
};

/// Monthly/weekly convolution kernels plus the two sigmoid layers.
struct EbcnnParams {
    EbcnnConfig config;
    TensorPtr month_kernel, month_bias; // [w, d, 40], [40]
    TensorPtr week_kernel, week_bias;   // [w, d, 20], [20]
    TensorPtr w1, b1;                   // [hidden, 40+20+d], [hidden]
    TensorPtr w2, b2;                   // [2, hidden], [2]

    static EbcnnParams init(const EbcnnConfig& config, Rng& rng) {
        EbcnnParams p;
        p.config = config;
        const std::size_t w = config.conv_window, d = config.dim;
        p.month_kernel = nnkit::glorot_uniform({w, d, config.month_channels}, w * d,
                                               config.month_channels, rng, "ebcnn.month_kernel");
        p.month_bias = nnkit::zeros({config.month_channels}, true, "ebcnn.month_bias");
        p.week_kernel = nnkit::glorot_uniform({w, d, config.week_channels}, w * d,
                                              config.week_channels, rng, "ebcnn.week_kernel");
        p.week_bias = nnkit::zeros({config.week_channels}, true, "ebcnn.week_bias");
        const std::size_t concat_len = config.month_channels + config.week_channels + d;
        p.w1 = nnkit::glorot_uniform({config.hidden, concat_len}, concat_len, config.hidden, rng,
                                     "ebcnn.w1");
        p.b1 = nnkit::zeros({config.hidden}, true, "ebcnn.b1");
        p.w2 = nnkit::glorot_uniform({2, config.hidden}, config.hidden, 2, rng, "ebcnn.w2");
        p.b2 = nnkit::zeros({2}, true, "ebcnn.b2");
        return p;
    }

    std::vector<TensorPtr> parameters() const {
        return {month_kernel, month_bias, week_kernel, week_bias, w1, b1, w2, b2};
    }
};

namespace detail {

inline TensorPtr sequence_tensor(const PaddedSequence& seq, std::size_t dim) {
    std::vector<double> flat;
    flat.reserve(seq.capacity() * dim);
    for (const auto& row : seq.rows) flat.insert(flat.end(), row.begin(), row.end());
    return nnkit::make_tensor({seq.capacity(), dim}, std::move(flat));
}

inline TensorPtr conv_branch(const PaddedSequence& seq, std::size_t dim,
                             const TensorPtr& kernel, const TensorPtr& bias) {
    auto conv = nnkit::conv1d(sequence_tensor(seq, dim), kernel, seq.valid, bias);
    return nnkit::maxpool_time(conv.features, conv.valid_positions);
}

} // namespace detail

/// V = [V_month, V_week, V_day]; H = sigmoid(W1 V + b1); O = sigmoid(W2 H + b2);
/// y = softmax(O) = (p_down, p_up). Pooling masks padded positions, so the
/// output never depends on padding content.
inline TensorPtr ebcnn_forward_t(const AlignedSample& sample, const EbcnnParams& params) {
    const auto& cfg = params.config;
    if (sample.day_embedding.size() != cfg.dim) {
        throw ShapeError("ebcnn_forward: day embedding length " +
                         std::to_string(sample.day_embedding.size()) + ", expected " +
                         std::to_string(cfg.dim));
    }
    auto v_month = detail::conv_branch(sample.month, cfg.dim, params.month_kernel,
                                       params.month_bias);
    auto v_week =
        detail::conv_branch(sample.week, cfg.dim, params.week_kernel, params.week_bias);
    auto v_day = nnkit::make_tensor({cfg.dim}, sample.day_embedding);
    auto v = nnkit::concat({v_month, v_week, v_day});
    auto h = nnkit::sigmoid(nnkit::add(nnkit::matvec(params.w1, v), params.b1));
    auto o = nnkit::sigmoid(nnkit::add(nnkit::matvec(params.w2, h), params.b2));
    return nnkit::softmax(o);
}

inline std::array<double, 2> ebcnn_forward(const AlignedSample& sample,
                                           const EbcnnParams& params) {
    auto y = ebcnn_forward_t(sample, params);
    return {y->data[0], y->data[1]};
}

struct ShortTermConfig {
    std::size_t dim = 100;
    std::size_t hidden = 150;
};

/// Day-embedding-only reference network, same two sigmoid layers.
struct ShortTermParams {
    ShortTermConfig config;
    TensorPtr w1, b1; // [hidden, d], [hidden]
    TensorPtr w2, b2; // [2, hidden], [2]

    static ShortTermParams init(const ShortTermConfig& config, Rng& rng) {
        ShortTermParams p;
        p.config = config;
        p.w1 = nnkit::glorot_uniform({config.hidden, config.dim}, config.dim, config.hidden, rng,
                                     "short.w1");
        p.b1 = nnkit::zeros({config.hidden}, true, "short.b1");
        p.w2 = nnkit::glorot_uniform({2, config.hidden}, config.hidden, 2, rng, "short.w2");
        p.b2 = nnkit::zeros({2}, true, "short.b2");
        return p;
    }

    std::vector<TensorPtr> parameters() const { return {w1, b1, w2, b2}; }
};

inline TensorPtr shortterm_forward_t(const std::vector<double>& day_embedding,
                                     const ShortTermParams& params) {
    if (day_embedding.size() != params.config.dim) {
        throw ShapeError("shortterm_forward: day embedding length " +
                         std::to_string(day_embedding.size()) + ", expected " +
                         std::to_string(params.config.dim));
    }
    auto v_day = nnkit::make_tensor({params.config.dim}, day_embedding);
    auto h = nnkit::sigmoid(nnkit::add(nnkit::matvec(params.w1, v_day), params.b1));
    auto o = nnkit::sigmoid(nnkit::add(nnkit::matvec(params.w2, h), params.b2));
    return nnkit::softmax(o);
}

inline std::array<double, 2> shortterm_forward(const std::vector<double>& day_embedding,
                                               const ShortTermParams& params) {
    auto y = shortterm_forward_t(day_embedding, params);
    return {y->data[0], y->data[1]};
}

} // namespace evstock::models
