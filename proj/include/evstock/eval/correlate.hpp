#pragma once

#include <span>
#include <string>
#include <vector>

#include "evstock/common/date.hpp"
#include "evstock/eval/metrics.hpp"
#include "evstock/marketdata/prices.hpp"
#include "evstock/textpipe/sentiment.hpp"

namespace evstock::eval {

struct DailyScore {
    Date date;
    textpipe::SentimentScore score;
};

struct LagCorrelationRow {
    std::string score_kind; // pos, neg, neu, compound, compound_vs_volume
    int lag_days = 0;
    double r = 0.0;
    std::size_t n = 0;
};

struct LagCorrelationTable {
    std::vector<LagCorrelationRow> rows;
    std::vector<std::string> warnings; // rows omitted for lack of pairs
};

namespace detail {

inline double score_component(const textpipe::SentimentScore& s, std::size_t kind) {
    switch (kind) {
    case 0: return s.pos;
    case 1: return s.neg;
    case 2: return s.neu;
    default: return s.compound;
    }
}

inline constexpr const char* kScoreKinds[4] = {"pos", "neg", "neu", "compound"};

} // namespace detail

/// Which price-change reading the lag table correlates against.
enum class PriceChange {
    close_to_close, // close(d+L) - close(d)
    open_to_close,  // close(d+L) - open(d)
};

/// Pearson correlations between day-d sentiment and the price change over
/// each lag, plus compound vs same-day volume. Days without a price bar on
/// d are skipped; the far end of a lag resolves to the next available bar.
/// Rows with fewer than 2 pairs (or degenerate variance) are omitted with a
/// warning record.
inline LagCorrelationTable lag_correlations(std::span<const DailyScore> daily_scores,
                                            const marketdata::PriceSeries& prices,
                                            std::span<const int> lags,
                                            PriceChange change = PriceChange::close_to_close) {
    LagCorrelationTable table;

    auto add_row = [&table](const std::string& kind, int lag, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
        if (xs.size() < 2) {
            table.warnings.push_back(kind + " lag " + std::to_string(lag) + ": only " +
                                     std::to_string(xs.size()) + " pairs, row omitted");
            return;
        }
        double r = 0.0;
        try {
            r = pearson(xs, ys);
        } catch (const DataError&) {
            table.warnings.push_back(kind + " lag " + std::to_string(lag) +
                                     ": constant series, row omitted");
            return;
        }
        table.rows.push_back(LagCorrelationRow{kind, lag, r, xs.size()});
    };

    for (std::size_t kind = 0; kind < 4; ++kind) {
        for (int lag : lags) {
            std::vector<double> xs, ys;
            for (const auto& ds : daily_scores) {
                auto base = marketdata::bar_at_or_after(prices, ds.date);
                if (!base || prices.bars[*base].date != ds.date) continue;
                auto far = marketdata::bar_at_or_after(prices, ds.date + lag);
                if (!far) continue;
                const double ref = change == PriceChange::close_to_close
                                       ? prices.bars[*base].close
                                       : prices.bars[*base].open;
                xs.push_back(detail::score_component(ds.score, kind));
                ys.push_back(prices.bars[*far].close - ref);
            }
            add_row(detail::kScoreKinds[kind], lag, xs, ys);
        }
    }

    // intensity against same-day traded volume
    std::vector<double> xs, ys;
    for (const auto& ds : daily_scores) {
        auto base = marketdata::bar_at_or_after(prices, ds.date);
        if (!base || prices.bars[*base].date != ds.date) continue;
        xs.push_back(ds.score.compound);
        ys.push_back(prices.bars[*base].volume);
    }
    add_row("compound_vs_volume", 0, xs, ys);
    return table;
}

} // namespace evstock::eval
