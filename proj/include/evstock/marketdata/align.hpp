#pragma once

#include <span>
#include <vector>

#include "evstock/common/date.hpp"

namespace evstock::marketdata {

/// Day/week/month horizon spans in calendar days.
struct Lags {
    int day = 1;
    int week = 7;
    int month = 30;
};

template <class T>
struct Horizons {
    std::vector<T> day;   // dated exactly d
    std::vector<T> week;  // dated in [d - week, d - 1]
    std::vector<T> month; // dated in [d - month, d - 1]; superset of week
};

/// Buckets date-sorted events around a reference day. The day bucket holds
/// events dated exactly d; week and month hold strictly-earlier events
/// within their spans, so week is a subset of month by construction.
template <class T, class DateOf>
Horizons<T> align_event_horizons(std::span<const T> events, Date day, DateOf&& date_of,
                                 Lags lags = {}) {
    Horizons<T> out;
    const Date week_lo = day - lags.week;
    const Date month_lo = day - lags.month;
    for (const auto& e : events) {
        const Date d = date_of(e);
        if (d > day) break; // date-sorted input
        if (d == day) {
            out.day.push_back(e);
            continue;
        }
        if (d >= month_lo) {
            out.month.push_back(e);
            if (d >= week_lo) out.week.push_back(e);
        }
    }
    return out;
}

template <class T>
Horizons<T> align_event_horizons(std::span<const T> events, Date day, Lags lags = {}) {
    return align_event_horizons(events, day, [](const T& e) { return e.date; }, lags);
}

} // namespace evstock::marketdata
