#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evstock/common/date.hpp"
#include "evstock/common/errors.hpp"
#include "evstock/marketdata/align.hpp"
#include "evstock/marketdata/prices.hpp"
#include "evstock/ntn/ntn.hpp"

namespace evstock::models {

/// Fixed-capacity event window: the first `valid` rows are real events in
/// date order, the rest are exactly zero.
struct PaddedSequence {
    std::vector<std::vector<double>> rows;
    std::size_t valid = 0;

    std::size_t capacity() const { return rows.size(); }
};

/// One training example for the classifiers.
struct AlignedSample {
    std::vector<double> day_embedding; // zero vector when no same-day event
    PaddedSequence week;               // capacity 7 by default
    PaddedSequence month;              // capacity 30 by default
    int label = 0;                     // next-day up/down
    Date date;
};

struct SampleConfig {
    std::size_t dim = 100;
    std::size_t week_capacity = 7;
    std::size_t month_capacity = 30;
    marketdata::Lags lags{};
};

namespace detail {

inline PaddedSequence pad_events(std::span<const ntn::EventEmbedding> bucket,
                                 std::size_t capacity, std::size_t dim) {
    PaddedSequence seq;
    seq.rows.assign(capacity, std::vector<double>(dim, 0.0));
    // keep the most recent `capacity` events, oldest first
    const std::size_t take = std::min(bucket.size(), capacity);
    const std::size_t skip = bucket.size() - take;
    for (std::size_t i = 0; i < take; ++i) seq.rows[i] = bucket[skip + i].u;
    seq.valid = take;
    return seq;
}

} // namespace detail

/// Builds one sample per trading day that has a next-day label. The day
/// embedding averages all same-day event embeddings and is zero when the
/// day has none.
inline std::vector<AlignedSample> build_aligned_samples(
    std::span<const ntn::EventEmbedding> events, const marketdata::PriceSeries& series,
    const SampleConfig& config) {
    std::vector<AlignedSample> samples;
    for (const auto& bar : series.bars) {
        auto label = marketdata::next_day_label(series, bar.date);
        if (!label) continue;
        auto horizons = marketdata::align_event_horizons(events, bar.date, config.lags);

        AlignedSample sample;
        sample.date = bar.date;
        sample.label = *label;
        sample.day_embedding.assign(config.dim, 0.0);
        if (!horizons.day.empty()) {
            for (const auto& e : horizons.day) {
                for (std::size_t i = 0; i < config.dim; ++i) sample.day_embedding[i] += e.u[i];
            }
            for (double& v : sample.day_embedding) {
                v /= static_cast<double>(horizons.day.size());
            }
        }
        sample.week = detail::pad_events(horizons.week, config.week_capacity, config.dim);
        sample.month = detail::pad_events(horizons.month, config.month_capacity, config.dim);
        samples.push_back(std::move(sample));
    }
    return samples;
}

} // namespace evstock::models
