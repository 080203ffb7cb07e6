#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "evstock/common/errors.hpp"

namespace evstock {

/// Calendar date stored as days since 1970-01-01, proleptic Gregorian.
/// Civil conversions follow the classic era/day-of-era arithmetic.
class Date {
public:
    Date() = default;

    static Date from_days(std::int64_t days) {
        Date d;
        d.days_ = days;
        return d;
    }

    static Date from_ymd(int year, int month, int day) {
        if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
            throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                            std::to_string(month) + "-" + std::to_string(day));
        }
        const std::int64_t y = year - (month <= 2 ? 1 : 0);
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy =
            static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return from_days(era * 146097 + static_cast<std::int64_t>(doe) - 719468);
    }

    /// Parses strict ISO-8601 "YYYY-MM-DD".
    static Date parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
            throw DataError("bad date '" + std::string(text) + "', expected YYYY-MM-DD");
        }
        int y = parse_int(text.substr(0, 4));
        int m = parse_int(text.substr(5, 2));
        int d = parse_int(text.substr(8, 2));
        return from_ymd(y, m, d);
    }

    std::int64_t days() const { return days_; }

    struct Ymd {
        int year;
        int month;
        int day;
    };

    Ymd ymd() const {
        const std::int64_t z = days_ + 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return Ymd{static_cast<int>(y + (m <= 2 ? 1 : 0)), static_cast<int>(m),
                   static_cast<int>(d)};
    }

    std::string to_string() const {
        Ymd c = ymd();
        char buf[11];
        auto pad = [](char* p, int v, int width) {
            for (int i = width - 1; i >= 0; --i) {
                p[i] = static_cast<char>('0' + v % 10);
                v /= 10;
            }
        };
        pad(buf, c.year, 4);
        buf[4] = '-';
        pad(buf + 5, c.month, 2);
        buf[7] = '-';
        pad(buf + 8, c.day, 2);
        buf[10] = '\0';
        return std::string(buf, 10);
    }

    /// 0 = Sunday ... 6 = Saturday.
    int weekday() const { return static_cast<int>(((days_ % 7) + 11) % 7); }
    bool is_weekend() const { return weekday() == 0 || weekday() == 6; }

    Date operator+(std::int64_t n) const { return from_days(days_ + n); }
    Date operator-(std::int64_t n) const { return from_days(days_ - n); }
    std::int64_t operator-(Date other) const { return days_ - other.days_; }
    Date& operator++() {
        ++days_;
        return *this;
    }

    auto operator<=>(const Date&) const = default;

private:
    static int parse_int(std::string_view s) {
        int v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
            throw DataError("bad number in date: '" + std::string(s) + "'");
        }
        return v;
    }

    static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static int days_in_month(int y, int m) {
        static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
    }

    std::int64_t days_ = 0;
};

} // namespace evstock
