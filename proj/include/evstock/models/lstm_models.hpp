#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "evstock/common/rng.hpp"
#include "evstock/marketdata/prices.hpp"
#include "evstock/models/sample.hpp"
#include "evstock/nnkit/lstm.hpp"
#include "evstock/nnkit/ops.hpp"

namespace evstock::models {

/// Binary classifier over an event-embedding sequence: final hidden state
/// through a dense sigmoid head.
struct LstmClassifierParams {
    nnkit::LstmParams cell;
    TensorPtr w_out; // [1, hidden]
    TensorPtr b_out; // [1]

    static LstmClassifierParams init(std::size_t input_dim, std::size_t hidden, Rng& rng) {
        LstmClassifierParams p;
        p.cell = nnkit::LstmParams::init(input_dim, hidden, rng);
        p.w_out = nnkit::glorot_uniform({1, hidden}, hidden, 1, rng, "lstmclf.w_out");
        p.b_out = nnkit::zeros({1}, true, "lstmclf.b_out");
        return p;
    }

    std::vector<TensorPtr> parameters() const {
        auto ps = cell.parameters();
        ps.push_back(w_out);
        ps.push_back(b_out);
        return ps;
    }
};

inline TensorPtr lstm_classify_logit_t(std::span<const std::vector<double>> sequence,
                                       const LstmClassifierParams& params) {
    if (sequence.empty()) throw ShapeError("lstm_classify: empty sequence");
    std::vector<TensorPtr> steps;
    steps.reserve(sequence.size());
    for (const auto& x : sequence) {
        steps.push_back(nnkit::make_tensor({params.cell.input_size}, x));
    }
    auto final_state = nnkit::lstm_run(steps, params.cell);
    return nnkit::add(nnkit::matvec(params.w_out, final_state.h), params.b_out);
}

/// Probability of an up move; threshold at 0.5 for a hard prediction.
inline double lstm_classify(std::span<const std::vector<double>> sequence,
                            const LstmClassifierParams& params) {
    return nnkit::sigmoid(lstm_classify_logit_t(sequence, params))->data[0];
}

/// Sequence fed to the classifier for one sample: valid month-horizon events
/// in date order with the day embedding appended, so it is never empty.
inline std::vector<std::vector<double>> classifier_sequence(const AlignedSample& sample) {
    std::vector<std::vector<double>> seq;
    seq.reserve(sample.month.valid + 1);
    for (std::size_t i = 0; i < sample.month.valid; ++i) seq.push_back(sample.month.rows[i]);
    seq.push_back(sample.day_embedding);
    return seq;
}

/// s x 5 normalized window with its k future normalized closes.
struct ForecastWindow {
    std::vector<std::array<double, marketdata::kFeatureCount>> matrix;
    std::size_t horizon = 0;
    std::vector<double> targets;
    Date end_date;
};

/// Windows with k-step-ahead close targets. Min-max statistics come from
/// the first stats_count bars (0 = whole series); later values clamp into
/// [0, 1], so evaluation splits can normalize without lookahead.
inline std::vector<ForecastWindow> make_forecast_windows(const marketdata::PriceSeries& series,
                                                         std::size_t s, std::size_t k,
                                                         std::size_t stats_count = 0) {
    if (k < 1) throw DataError("make_forecast_windows: horizon must be >= 1");
    if (series.bars.size() < s + k) {
        throw DataError("make_forecast_windows: series of length " +
                        std::to_string(series.bars.size()) + " too short for window " +
                        std::to_string(s) + " + horizon " + std::to_string(k));
    }
    if (stats_count == 0 || stats_count > series.bars.size()) {
        stats_count = series.bars.size();
    }
    marketdata::PriceSeries stats_span;
    stats_span.ticker = series.ticker;
    stats_span.bars.assign(series.bars.begin(),
                           series.bars.begin() + static_cast<std::ptrdiff_t>(stats_count));
    auto normalized = marketdata::minmax_normalize(stats_span);
    // extend past the stats span with the same ranges, clamped into [0, 1]
    if (stats_count < series.bars.size()) {
        std::array<double, marketdata::kFeatureCount> lo{}, hi{};
        for (std::size_t c = 0; c < marketdata::kFeatureCount; ++c) {
            lo[c] = hi[c] = marketdata::bar_features(series.bars[0])[c];
        }
        for (std::size_t i = 0; i < stats_count; ++i) {
            auto f = marketdata::bar_features(series.bars[i]);
            for (std::size_t c = 0; c < marketdata::kFeatureCount; ++c) {
                lo[c] = std::min(lo[c], f[c]);
                hi[c] = std::max(hi[c], f[c]);
            }
        }
        for (std::size_t i = stats_count; i < series.bars.size(); ++i) {
            auto f = marketdata::bar_features(series.bars[i]);
            std::array<double, marketdata::kFeatureCount> row{};
            for (std::size_t c = 0; c < marketdata::kFeatureCount; ++c) {
                const double v = hi[c] > lo[c] ? (f[c] - lo[c]) / (hi[c] - lo[c]) : 0.0;
                row[c] = std::clamp(v, 0.0, 1.0);
            }
            normalized.push_back(row);
        }
    }
    std::vector<ForecastWindow> out;
    for (std::size_t start = 0; start + s + k <= series.bars.size(); ++start) {
        ForecastWindow w;
        w.matrix.assign(normalized.begin() + static_cast<std::ptrdiff_t>(start),
                        normalized.begin() + static_cast<std::ptrdiff_t>(start + s));
        w.horizon = k;
        for (std::size_t j = 0; j < k; ++j) {
            w.targets.push_back(normalized[start + s + j][1]); // close column
        }
        w.end_date = series.bars[start + s - 1].date;
        out.push_back(std::move(w));
    }
    return out;
}

/// Multi-step price forecaster: the window runs through a small LSTM and a
/// dense head emits all k horizons at once.
struct ForecasterParams {
    nnkit::LstmParams cell; // input 5
    TensorPtr w_out;        // [k, hidden]
    TensorPtr b_out;        // [k]
    std::size_t horizon = 0;

    static ForecasterParams init(std::size_t hidden, std::size_t horizon, Rng& rng) {
        ForecasterParams p;
        p.cell = nnkit::LstmParams::init(marketdata::kFeatureCount, hidden, rng);
        p.w_out = nnkit::glorot_uniform({horizon, hidden}, hidden, horizon, rng, "fc.w_out");
        p.b_out = nnkit::zeros({horizon}, true, "fc.b_out");
        p.horizon = horizon;
        return p;
    }

    std::vector<TensorPtr> parameters() const {
        auto ps = cell.parameters();
        ps.push_back(w_out);
        ps.push_back(b_out);
        return ps;
    }
};

inline TensorPtr lstm_forecast_t(const ForecastWindow& window, const ForecasterParams& params) {
    if (window.horizon != params.horizon) {
        throw ShapeError("lstm_forecast: window horizon " + std::to_string(window.horizon) +
                         ", model emits " + std::to_string(params.horizon));
    }
    std::vector<TensorPtr> steps;
    steps.reserve(window.matrix.size());
    for (const auto& row : window.matrix) {
        steps.push_back(nnkit::make_tensor({marketdata::kFeatureCount},
                                           std::vector<double>(row.begin(), row.end())));
    }
    auto final_state = nnkit::lstm_run(steps, params.cell);
    return nnkit::add(nnkit::matvec(params.w_out, final_state.h), params.b_out);
}

inline std::vector<double> lstm_forecast(const ForecastWindow& window,
                                         const ForecasterParams& params) {
    return lstm_forecast_t(window, params)->data;
}

/// Mean squared error of the forecast against the window targets.
inline TensorPtr forecast_loss_t(const ForecastWindow& window, const ForecasterParams& params) {
    auto pred = lstm_forecast_t(window, params);
    auto target = nnkit::make_tensor({window.targets.size()}, window.targets);
    auto diff = nnkit::sub(pred, target);
    return nnkit::scale(nnkit::sum_squares(diff), 1.0 / static_cast<double>(window.horizon));
}

} // namespace evstock::models
