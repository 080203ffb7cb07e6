#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "evstock/common/date.hpp"
#include "evstock/common/errors.hpp"
#include "evstock/common/text.hpp"

namespace evstock::marketdata {

struct PriceBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

struct PriceSeries {
    std::string ticker;
    std::vector<PriceBar> bars; // strictly ascending dates
};

/// Feature column order used by every normalized matrix in the repo.
inline constexpr std::size_t kFeatureCount = 5;
inline constexpr const char* kFeatureNames[kFeatureCount] = {"open", "close", "high", "low",
                                                             "volume"};

inline std::array<double, kFeatureCount> bar_features(const PriceBar& bar) {
    return {bar.open, bar.close, bar.high, bar.low, bar.volume};
}

struct NormalizedWindow {
    std::vector<std::array<double, kFeatureCount>> matrix; // s rows, entries in [0,1]
    Date end_date;
};

inline void validate_bar(const PriceBar& bar, const std::string& where) {
    if (!(bar.low <= bar.open && bar.open <= bar.high)) {
        throw DataError(where + ": open " + format_double(bar.open) + " outside [low, high] = [" +
                        format_double(bar.low) + ", " + format_double(bar.high) + "]");
    }
    if (!(bar.low <= bar.close && bar.close <= bar.high)) {
        throw DataError(where + ": close " + format_double(bar.close) +
                        " outside [low, high] = [" + format_double(bar.low) + ", " +
                        format_double(bar.high) + "]");
    }
    if (bar.volume < 0.0) {
        throw DataError(where + ": negative volume " + format_double(bar.volume));
    }
}

/// Loads one ticker's CSV (`date,open,high,low,close,volume`). Rows are
/// validated against PriceBar invariants and sorted by date; the ticker is
/// taken from the filename stem.
inline PriceSeries load_prices(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw DataError("price file not found: " + path.string());
    }
    auto lines = read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": empty price file");
    if (trim(lines[0]) != "date,open,high,low,close,volume") {
        throw DataError(path.string() + ":1: bad header '" + lines[0] +
                        "', expected 'date,open,high,low,close,volume'");
    }

    PriceSeries series;
    series.ticker = path.stem().string();
    std::unordered_set<std::int64_t> seen_dates;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string where = path.string() + ":" + std::to_string(li + 1);
        std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 6) {
            throw DataError(where + ": expected 6 fields, got " + std::to_string(fields.size()));
        }
        PriceBar bar;
        try {
            bar.date = Date::parse(trim(fields[0]));
            bar.open = parse_double(trim(fields[1]), "open");
            bar.high = parse_double(trim(fields[2]), "high");
            bar.low = parse_double(trim(fields[3]), "low");
            bar.close = parse_double(trim(fields[4]), "close");
            bar.volume = parse_double(trim(fields[5]), "volume");
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        validate_bar(bar, where);
        if (!seen_dates.insert(bar.date.days()).second) {
            throw DataError(where + ": duplicate date " + bar.date.to_string());
        }
        series.bars.push_back(bar);
    }
    std::sort(series.bars.begin(), series.bars.end(),
              [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
    return series;
}

inline void save_prices(const PriceSeries& series, const std::filesystem::path& path) {
    std::string out = "date,open,high,low,close,volume\n";
    for (const auto& bar : series.bars) {
        out += bar.date.to_string();
        out += ',';
        out += format_double(bar.open);
        out += ',';
        out += format_double(bar.high);
        out += ',';
        out += format_double(bar.low);
        out += ',';
        out += format_double(bar.close);
        out += ',';
        out += format_double(bar.volume);
        out += '\n';
    }
    write_file(path, out);
}

/// Per-column min-max over the whole series, columns in feature order.
/// A constant column maps to all zeros.
inline std::vector<std::array<double, kFeatureCount>> minmax_normalize(const PriceSeries& series) {
    if (series.bars.empty()) throw DataError("minmax_normalize: empty series");
    std::array<double, kFeatureCount> lo{}, hi{};
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
        lo[c] = hi[c] = bar_features(series.bars[0])[c];
    }
    for (const auto& bar : series.bars) {
        auto f = bar_features(bar);
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            lo[c] = std::min(lo[c], f[c]);
            hi[c] = std::max(hi[c], f[c]);
        }
    }
    std::vector<std::array<double, kFeatureCount>> rows;
    rows.reserve(series.bars.size());
    for (const auto& bar : series.bars) {
        auto f = bar_features(bar);
        std::array<double, kFeatureCount> row{};
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            row[c] = hi[c] > lo[c] ? (f[c] - lo[c]) / (hi[c] - lo[c]) : 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

/// Intraday label: 1 iff close >= open.
inline int label_updown(const PriceBar& bar) { return bar.close >= bar.open ? 1 : 0; }

/// Overlapping length-s windows over the series, normalized per column
/// against the full series (not per window).
inline std::vector<NormalizedWindow> windows(const PriceSeries& series, std::size_t s) {
    if (s < 1) throw DataError("windows: window size must be >= 1");
    if (series.bars.size() < s) {
        throw DataError("windows: series of length " + std::to_string(series.bars.size()) +
                        " shorter than window " + std::to_string(s));
    }
    auto normalized = minmax_normalize(series);
    std::vector<NormalizedWindow> result;
    result.reserve(series.bars.size() - s + 1);
    for (std::size_t start = 0; start + s <= series.bars.size(); ++start) {
        NormalizedWindow w;
        w.matrix.assign(normalized.begin() + static_cast<std::ptrdiff_t>(start),
                        normalized.begin() + static_cast<std::ptrdiff_t>(start + s));
        w.end_date = series.bars[start + s - 1].date;
        result.push_back(std::move(w));
    }
    return result;
}

/// Index of the last bar dated <= day, if any.
inline std::optional<std::size_t> bar_at_or_before(const PriceSeries& series, Date day) {
    auto it = std::upper_bound(series.bars.begin(), series.bars.end(), day,
                               [](Date d, const PriceBar& b) { return d < b.date; });
    if (it == series.bars.begin()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(series.bars.begin(), it) - 1);
}

/// Index of the first bar dated >= day, if any.
inline std::optional<std::size_t> bar_at_or_after(const PriceSeries& series, Date day) {
    auto it = std::lower_bound(series.bars.begin(), series.bars.end(), day,
                               [](const PriceBar& b, Date d) { return b.date < d; });
    if (it == series.bars.end()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(series.bars.begin(), it));
}

/// Next-day movement label for day: 1 iff the close of the next trading day
/// after `day` is >= the prevailing close at `day`. Weekends and holidays
/// skip forward to the next bar present in the series; absent when there is
/// no prevailing close or no later bar.
inline std::optional<int> next_day_label(const PriceSeries& series, Date day) {
    auto base = bar_at_or_before(series, day);
    if (!base) return std::nullopt;
    if (*base + 1 >= series.bars.size()) return std::nullopt;
    const double now = series.bars[*base].close;
    const double next = series.bars[*base + 1].close;
    return next >= now ? 1 : 0;
}

} // namespace evstock::marketdata
