#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "evstock/common/rng.hpp"
#include "evstock/eval/correlate.hpp"
#include "evstock/eval/metrics.hpp"
#include "evstock/eval/report.hpp"
#include "evstock/eval/split.hpp"

using namespace evstock;
using namespace evstock::eval;

namespace {

struct Dated {
    Date date;
    int id;
};

std::vector<Dated> dated_fixture(std::size_t n, Date start) {
    std::vector<Dated> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({start + static_cast<int>(i), (int)i});
    return out;
}

// minimal well-formedness scan: balanced tags, quoted attributes
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        std::size_t close = text.find('>', i);
        if (close == std::string::npos) return false;
        std::string tag = text.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag.front() == '?' || tag.starts_with("!--")) continue;
        std::size_t quotes = 0;
        for (char c : tag) quotes += c == '"' ? 1 : 0;
        if (quotes % 2 != 0) return false;
        if (tag.front() == '/') {
            if (stack.empty()) return false;
            if (stack.back() != tag.substr(1)) return false;
            stack.pop_back();
        } else if (tag.back() != '/') {
            stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
        }
    }
    return stack.empty();
}

marketdata::PriceBar close_bar(Date d, double close, double volume = 1000) {
    marketdata::PriceBar b;
    b.date = d;
    b.open = close;
    b.high = close + 1;
    b.low = close - 1;
    b.close = close;
    b.volume = volume;
    return b;
}

} // namespace

TEST_CASE("chrono_split ratio arithmetic and frontier") {
    auto samples = dated_fixture(10, Date::parse("2020-01-01"));
    SplitConfig cfg;
    cfg.ratio = 0.7;
    auto [train, test] = chrono_split(std::span<const Dated>(samples), cfg);
    CHECK(train.size() == 7);
    CHECK(test.size() == 3);
    for (const auto& tr : train) {
        for (const auto& te : test) CHECK(tr.date <= te.date);
    }

    cfg.ratio = 0.05;
    CHECK_THROWS_AS(chrono_split(std::span<const Dated>(samples), cfg), DataError);
    cfg.ratio = 1.5;
    CHECK_THROWS_AS(chrono_split(std::span<const Dated>(samples), cfg), UsageError);
}

TEST_CASE("chrono_split shuffle permutes order but never membership") {
    auto samples = dated_fixture(40, Date::parse("2020-01-01"));
    SplitConfig plain;
    plain.ratio = 0.6;
    SplitConfig shuffled = plain;
    shuffled.shuffle_train = true;
    shuffled.seed = 9;

    auto [train_a, test_a] = chrono_split(std::span<const Dated>(samples), plain);
    auto [train_b, test_b] = chrono_split(std::span<const Dated>(samples), shuffled);
    REQUIRE(train_a.size() == train_b.size());
    CHECK(test_a.size() == test_b.size());

    std::vector<int> ids_a, ids_b;
    for (const auto& s : train_a) ids_a.push_back(s.id);
    for (const auto& s : train_b) ids_b.push_back(s.id);
    CHECK(ids_a != ids_b); // order differs under this seed
    std::sort(ids_a.begin(), ids_a.end());
    std::sort(ids_b.begin(), ids_b.end());
    CHECK(ids_a == ids_b); // membership identical
}

TEST_CASE("chrono_split frontier holds over random fixtures") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 4 + rng.uniform_int(60);
        auto samples = dated_fixture(n, Date::parse("2015-01-01"));
        SplitConfig cfg;
        cfg.ratio = 0.15 + 0.7 * rng.uniform();
        cfg.shuffle_train = rng.uniform() < 0.5;
        cfg.seed = rng.next_u64();
        std::pair<std::vector<Dated>, std::vector<Dated>> split;
        try {
            split = chrono_split(std::span<const Dated>(samples), cfg);
        } catch (const DataError&) {
            continue; // degenerate ratio for this n
        }
        Date max_train = split.first[0].date;
        for (const auto& s : split.first) max_train = std::max(max_train, s.date);
        for (const auto& s : split.second) CHECK(max_train <= s.date);
        CHECK(split.first.size() + split.second.size() == n);
    }
}

TEST_CASE("accuracy counting and errors") {
    std::vector<int> a{1, 0, 1, 1}, b{1, 1, 1, 0};
    CHECK(accuracy(a, a) == 1.0);
    std::vector<int> inv{0, 1, 0, 0};
    CHECK(accuracy(inv, a) == 0.0);
    CHECK(accuracy(a, b) == 0.5);

    std::vector<int> shorter{1, 0};
    CHECK_THROWS_AS(accuracy(shorter, a), DataError);
    std::vector<int> empty;
    CHECK_THROWS_AS(accuracy(empty, empty), DataError);
}

TEST_CASE("accuracy complement identity") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(30);
        std::vector<int> p(n), l(n), p_inv(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = static_cast<int>(rng.uniform_int(2));
            l[i] = static_cast<int>(rng.uniform_int(2));
            p_inv[i] = 1 - p[i];
        }
        CHECK(accuracy(p, l) + accuracy(p_inv, l) == 1.0);
    }
}

TEST_CASE("pearson known values") {
    std::vector<double> x{1, 2, 3}, y{2, 4, 6}, yn{-2, -4, -6};
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, yn) == doctest::Approx(-1.0).epsilon(1e-12));

    std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
    CHECK(pearson(a, b) == doctest::Approx(0.8).epsilon(1e-12));

    std::vector<double> constant{5, 5, 5};
    CHECK_THROWS_AS(pearson(x, constant), DataError);
    std::vector<double> two{1.0};
    CHECK_THROWS_AS(pearson(two, two), DataError);
}

TEST_CASE("pearson symmetry, affine invariance, and summation oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + rng.uniform_int(40);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-5.0, 5.0);
            y[i] = rng.uniform(-5.0, 5.0);
        }
        const double r = pearson(x, y);
        CHECK(std::abs(r - pearson(y, x)) < 1e-12);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);

        // one-pass summation oracle
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            syy += y[i] * y[i];
            sxy += x[i] * y[i];
        }
        const double nn = static_cast<double>(n);
        const double oracle = (nn * sxy - sx * sy) /
                              std::sqrt((nn * sxx - sx * sx) * (nn * syy - sy * sy));
        CHECK(std::abs(r - oracle) < 1e-10);

        const double scale = rng.uniform(0.1, 3.0);
        const double shift = rng.uniform(-10.0, 10.0);
        std::vector<double> xs(n), xneg(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = scale * x[i] + shift;
            xneg[i] = -scale * x[i] + shift;
        }
        CHECK(std::abs(pearson(xs, y) - r) < 1e-10);
        CHECK(std::abs(pearson(xneg, y) + r) < 1e-10);
    }
}

TEST_CASE("lag_correlations recovers a planted lag and rejects others") {
    // blocks of 8 days; within each block the daily increments realize
    // independent lag-1, lag-3, lag-7 changes
    Rng rng(23);
    marketdata::PriceSeries prices;
    prices.ticker = "LAG";
    std::vector<DailyScore> scores;
    Date d = Date::parse("2015-01-01");
    double close = 100.0;
    for (int block = 0; block < 80; ++block) {
        const double lag1 = rng.uniform(-0.4, 0.4);
        const double lag3 = rng.uniform(-0.4, 0.4);
        const double lag7 = rng.uniform(-0.4, 0.4);

        DailyScore ds;
        ds.date = d;
        ds.score.compound = lag3; // equals the block's 3-day change exactly
        ds.score.pos = rng.uniform(0.0, 0.5);
        ds.score.neg = rng.uniform(0.0, 0.5);
        ds.score.neu = 1.0 - ds.score.pos - ds.score.neg;
        scores.push_back(ds);

        double increments[8];
        increments[0] = lag1;
        increments[1] = (lag3 - lag1) / 2;
        increments[2] = (lag3 - lag1) / 2;
        increments[3] = (lag7 - lag3) / 4;
        increments[4] = (lag7 - lag3) / 4;
        increments[5] = (lag7 - lag3) / 4;
        increments[6] = (lag7 - lag3) / 4;
        increments[7] = rng.uniform(-0.2, 0.2); // block boundary drift
        for (int i = 0; i < 8; ++i) {
            prices.bars.push_back(close_bar(d, close));
            close += increments[i];
            ++d;
        }
    }

    std::vector<int> lags{1, 3, 7};
    auto table = lag_correlations(scores, prices, lags);

    bool saw_planted = false;
    for (const auto& row : table.rows) {
        if (row.score_kind == "compound" && row.lag_days == 3) {
            saw_planted = true;
            CHECK(row.r == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(row.n == 80);
        }
        if (row.score_kind == "compound" && row.lag_days != 3 && row.lag_days != 0) {
            CHECK(std::abs(row.r) < 0.2);
        }
    }
    CHECK(saw_planted);
}

TEST_CASE("lag_correlations skips days without prices, pair count oracle") {
    marketdata::PriceSeries prices;
    prices.ticker = "GAP";
    Date d = Date::parse("2016-01-01");
    for (int i = 0; i < 10; ++i) {
        prices.bars.push_back(close_bar(d + i, 100.0 + i));
    }
    Rng rng(5);
    std::vector<DailyScore> scores;
    for (int i = 0; i < 14; ++i) { // last days run past the series
        DailyScore ds;
        ds.date = d + i;
        ds.score.compound = rng.uniform(-1.0, 1.0);
        scores.push_back(ds);
    }
    std::vector<int> lags{3};
    auto table = lag_correlations(scores, prices, lags);
    // brute-force pairing: day i pairs iff bar(i) exists and any bar >= i+3
    std::size_t expected = 0;
    for (int i = 0; i < 14; ++i) {
        const bool has_base = i < 10;
        const bool has_far = i + 3 <= 9;
        if (has_base && has_far) ++expected;
    }
    for (const auto& row : table.rows) {
        if (row.score_kind == "compound" && row.lag_days == 3) CHECK(row.n == expected);
    }
}

TEST_CASE("lag_correlations stays near zero on independent noise") {
    Rng rng(29);
    marketdata::PriceSeries prices;
    prices.ticker = "IND";
    Date d = Date::parse("2015-01-01");
    double close = 500.0;
    std::vector<DailyScore> scores;
    for (int i = 0; i < 220; ++i) {
        prices.bars.push_back(close_bar(d, close, 1000 + 10 * rng.uniform()));
        DailyScore ds;
        ds.date = d;
        ds.score.compound = rng.uniform(-1.0, 1.0);
        ds.score.pos = rng.uniform(0.0, 1.0);
        scores.push_back(ds);
        close += rng.uniform(-1.0, 1.0);
        ++d;
    }
    std::vector<int> lags{1, 3, 7};
    auto table = lag_correlations(scores, prices, lags);
    for (const auto& row : table.rows) {
        if (row.score_kind == "compound" || row.score_kind == "pos") {
            if (row.lag_days != 0) CHECK(std::abs(row.r) < 0.2);
        }
    }
}

TEST_CASE("lag_correlations supports the open-to-close change reading") {
    marketdata::PriceSeries prices;
    prices.ticker = "OC";
    Date d = Date::parse("2016-01-01");
    Rng rng(77);
    std::vector<DailyScore> scores;
    for (int i = 0; i < 30; ++i) {
        marketdata::PriceBar b;
        b.date = d;
        b.open = 100 + rng.uniform(-2.0, 2.0);
        b.close = 100 + rng.uniform(-2.0, 2.0);
        b.high = std::max(b.open, b.close) + 1;
        b.low = std::min(b.open, b.close) - 1;
        b.volume = 1000;
        prices.bars.push_back(b);
        DailyScore ds;
        ds.date = d;
        // score equals tomorrow's close minus today's open, scaled into range
        ds.score.compound = 0.0;
        scores.push_back(ds);
        ++d;
    }
    for (int i = 0; i + 1 < 30; ++i) {
        scores[i].score.compound = (prices.bars[i + 1].close - prices.bars[i].open) / 10.0;
    }
    std::vector<int> lags{1};
    auto oc = lag_correlations(scores, prices, lags, PriceChange::open_to_close);
    bool found = false;
    for (const auto& row : oc.rows) {
        if (row.score_kind == "compound" && row.lag_days == 1) {
            found = true;
            CHECK(row.r == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK(found);
}

TEST_CASE("lag_correlations omits starved rows with warnings") {
    marketdata::PriceSeries prices;
    prices.ticker = "TINY";
    prices.bars.push_back(close_bar(Date::parse("2016-01-01"), 100));
    std::vector<DailyScore> scores;
    DailyScore ds;
    ds.date = Date::parse("2016-01-01");
    ds.score.compound = 0.3;
    scores.push_back(ds);

    std::vector<int> lags{1};
    auto table = lag_correlations(scores, prices, lags);
    CHECK(table.rows.empty());
    CHECK(!table.warnings.empty());
}

TEST_CASE("emit_curves writes exact CSV and well-formed SVG") {
    auto dir = std::filesystem::temp_directory_path() / "evstock_eval_report";
    std::filesystem::create_directories(dir);

    AccuracyCurves one;
    one.train = {0.75};
    one.test = {0.5};
    emit_curves(one, dir / "one");
    auto csv = read_file(dir / "one.csv");
    CHECK(csv == "epoch,train_acc,test_acc\n1,0.75,0.5\n");

    AccuracyCurves curve;
    for (int i = 0; i < 30; ++i) {
        curve.train.push_back(0.5 + 0.4 * i / 29.0);
        curve.test.push_back(0.5 + 0.1 * i / 29.0);
    }
    emit_curves(curve, dir / "run", "seed=42");
    auto first_csv = read_file(dir / "run.csv");
    auto first_svg = read_file(dir / "run.svg");
    CHECK(first_csv.starts_with("# seed=42\n"));
    emit_curves(curve, dir / "run", "seed=42");
    CHECK(read_file(dir / "run.csv") == first_csv); // byte-identical rerun
    CHECK(read_file(dir / "run.svg") == first_svg);
    CHECK(xml_well_formed(first_svg));

    AccuracyCurves bad;
    CHECK_THROWS_AS(emit_curves(bad, dir / "bad"), DataError);
    CHECK_THROWS_AS(emit_curves(one, dir / "no_such_dir" / "x"), DataError);

    std::filesystem::remove_all(dir);
}

TEST_CASE("save_correlations emits the table format") {
    LagCorrelationTable table;
    table.rows.push_back({"compound", 3, 0.5, 10});
    table.warnings.push_back("pos lag 1: only 1 pairs, row omitted");
    auto path = std::filesystem::temp_directory_path() / "evstock_corr_test.csv";
    save_correlations(table, path, "seed=7");
    auto csv = read_file(path);
    std::filesystem::remove(path);
    CHECK(csv == "# seed=7\nscore_kind,lag_days,pearson_r,n\ncompound,3,0.5,10\n"
                 "# warning: pos lag 1: only 1 pairs, row omitted\n");
}
