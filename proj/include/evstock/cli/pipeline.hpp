#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evstock/cli/config.hpp"
#include "evstock/common/text.hpp"
#include "evstock/embeddings/embed.hpp"
#include "evstock/eval/report.hpp"
#include "evstock/eval/split.hpp"
#include "evstock/marketdata/prices.hpp"
#include "evstock/models/train.hpp"
#include "evstock/ntn/ntn.hpp"
#include "evstock/textpipe/sentiment.hpp"

namespace evstock::cli {

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::string_view> labels) {
    Rng rng(base);
    for (auto label : labels) rng = rng.derive(label);
    return rng.next_u64();
}

} // namespace detail

/// Per-ticker slice of the loaded dataset.
struct TickerData {
    marketdata::PriceSeries prices;
    std::vector<textpipe::Headline> headlines; // date-sorted, stable
};

/// Lazily materialized run: each subcommand pulls the stages it needs in
/// memory and writes only its own artifacts, so every command is
/// self-contained and reruns are byte-identical under a fixed seed.
class Pipeline {
public:
    explicit Pipeline(RunConfig config) : cfg_(std::move(config)) {}

    void ingest() {
        ensure_dataset();
        ensure_out_dir();
        nlohmann::json manifest;
        manifest["seed"] = cfg_.seed;
        nlohmann::json tickers = nlohmann::json::array();
        std::size_t matched = 0;
        for (const auto& td : tickers_) {
            nlohmann::json t;
            t["ticker"] = td.prices.ticker;
            t["bars"] = td.prices.bars.size();
            t["first_date"] = td.prices.bars.front().date.to_string();
            t["last_date"] = td.prices.bars.back().date.to_string();
            t["articles"] = td.headlines.size();
            matched += td.headlines.size();
            tickers.push_back(std::move(t));
        }
        manifest["tickers"] = std::move(tickers);
        manifest["total_articles"] = headlines_.size();
        manifest["unmatched_articles"] = headlines_.size() - matched;
        write_file(cfg_.out_dir / "manifest.json", manifest.dump(2) + "\n");
    }

    void sentiment() {
        ensure_scores();
        ensure_out_dir();
        std::string csv = seed_comment();
        csv += "date,ticker,pos,neg,neu,compound\n";
        for (std::size_t i = 0; i < headlines_.size(); ++i) {
            const auto& h = headlines_[i];
            const auto& s = scores_[i];
            csv += h.date.to_string() + "," + h.ticker + "," + format_double(s.pos) + "," +
                   format_double(s.neg) + "," + format_double(s.neu) + "," +
                   format_double(s.compound) + "\n";
        }
        write_file(cfg_.out_dir / "sentiment.csv", csv);
    }

    void events() {
        ensure_events();
        ensure_out_dir();
        std::string tsv = seed_comment();
        tsv += "date\tticker\tactor\taction\tobject\n";
        for (std::size_t i = 0; i < headlines_.size(); ++i) {
            for (const auto& e : event_tuples_[i]) {
                tsv += e.date.to_string() + "\t" + headlines_[i].ticker + "\t" +
                       join(e.actor, " ") + "\t" + e.action + "\t" + join(e.object, " ") + "\n";
            }
        }
        write_file(cfg_.out_dir / "events.tsv", tsv);
    }

    void embed() {
        ensure_out_dir();
        for (const auto& scope : scopes()) {
            const auto& store = ensure_word_embeddings(scope);
            const auto name = scope.empty() ? std::string("embeddings.txt")
                                            : "embeddings_" + scope + ".txt";
            embeddings::save_embeddings(cfg_.out_dir / name, store.vocab, store.embeddings);
        }
    }

    void train_ntn() {
        ensure_out_dir();
        for (const auto& scope : scopes()) {
            const auto& trained = ensure_ntn(scope);
            const auto suffix = scope.empty() ? std::string() : "_" + scope;
            ntn::save_ntn(cfg_.out_dir / ("ntn" + suffix + ".ckpt"), trained.params,
                          cfg_.ntn_lambda, cfg_.seed);
            std::string csv = seed_comment();
            csv += "epoch,loss\n";
            for (std::size_t e = 0; e < trained.loss_curve.size(); ++e) {
                csv += std::to_string(e + 1) + "," + format_double(trained.loss_curve[e]) + "\n";
            }
            write_file(cfg_.out_dir / ("ntn_loss" + suffix + ".csv"), csv);
        }
    }

    void align() {
        ensure_out_dir();
        for (const auto& td : tickers()) {
            const auto& events = ensure_event_embeddings(td.prices.ticker);
            const auto& samples = ensure_samples(td.prices.ticker);
            std::string csv = seed_comment();
            csv += "date,label,day_events,week_events,month_events\n";
            for (const auto& s : samples) {
                auto horizons = marketdata::align_event_horizons(
                    std::span<const ntn::EventEmbedding>(events), s.date, cfg_.lags);
                csv += s.date.to_string() + "," + std::to_string(s.label) + "," +
                       std::to_string(horizons.day.size()) + "," +
                       std::to_string(s.week.valid) + "," + std::to_string(s.month.valid) + "\n";
            }
            write_file(cfg_.out_dir / ("aligned_" + td.prices.ticker + ".csv"), csv);
        }
    }

    void train() {
        ensure_out_dir();
        for (const auto& td : tickers()) ensure_trained(td.prices.ticker);
    }

    void evaluate() {
        ensure_out_dir();
        for (const auto& td : tickers()) {
            const auto& result = ensure_trained(td.prices.ticker);
            nlohmann::json report;
            report["seed"] = cfg_.seed;
            report["ticker"] = td.prices.ticker;
            report["model"] = cfg_.model;
            if (cfg_.model == "forecast") {
                report["windows"] = result.sample_count;
                report["train_size"] = result.train_size;
                report["test_size"] = result.test_size;
                report["final_train_mse"] = result.final_train_mse;
                report["test_mse"] = result.test_mse;
            } else {
                report["samples"] = result.sample_count;
                report["train_size"] = result.train_size;
                report["test_size"] = result.test_size;
                report["final_train_accuracy"] = result.curves.train.back();
                report["final_test_accuracy"] = result.curves.test.back();
                report["up_fraction"] = result.up_fraction;
            }
            write_file(cfg_.out_dir / ("eval_" + td.prices.ticker + ".json"),
                       report.dump(2) + "\n");
        }
    }

    void correlate() {
        ensure_scores();
        ensure_out_dir();
        for (const auto& td : tickers()) {
            if (td.headlines.empty()) {
                warnings_.push_back("correlate: no headlines for " + td.prices.ticker +
                                    ", table omitted");
                continue;
            }
            auto daily = daily_mean_scores(td.prices.ticker);
            const std::vector<int> lags{1, 3, 7};
            auto table = eval::lag_correlations(daily, td.prices, lags);
            eval::save_correlations(table,
                                    cfg_.out_dir / ("correlations_" + td.prices.ticker + ".csv"),
                                    seed_note());
        }
    }

    void run_all() {
        ingest();
        sentiment();
        events();
        embed();
        train_ntn();
        align();
        train();
        evaluate();
        correlate();
    }

    /// Per-day mean of each sentiment component over one ticker's headlines.
    std::vector<eval::DailyScore> daily_mean_scores(const std::string& ticker) {
        ensure_scores();
        struct Acc {
            double pos = 0, neg = 0, neu = 0, compound = 0;
            std::size_t n = 0;
        };
        std::map<Date, Acc> grouped;
        for (std::size_t i = 0; i < headlines_.size(); ++i) {
            if (headlines_[i].ticker != ticker) continue;
            auto& acc = grouped[headlines_[i].date];
            acc.pos += scores_[i].pos;
            acc.neg += scores_[i].neg;
            acc.neu += scores_[i].neu;
            acc.compound += scores_[i].compound;
            ++acc.n;
        }
        std::vector<eval::DailyScore> daily;
        for (auto& [date, acc] : grouped) {
            const double inv = 1.0 / static_cast<double>(acc.n);
            daily.push_back({date, {acc.pos * inv, acc.neg * inv, acc.neu * inv,
                                    acc.compound * inv}});
        }
        return daily;
    }

    const std::vector<TickerData>& tickers() {
        ensure_dataset();
        return tickers_;
    }

    const std::vector<std::string>& warnings() const { return warnings_; }

    struct TrainOutcome {
        models::AccuracyCurves curves;
        std::size_t sample_count = 0;
        std::size_t train_size = 0;
        std::size_t test_size = 0;
        double up_fraction = 0.0;
        double final_train_mse = 0.0;
        double test_mse = 0.0;
    };

    const std::vector<models::AlignedSample>& samples_for(const std::string& ticker) {
        return ensure_samples(ticker);
    }

    const TrainOutcome& ensure_trained(const std::string& ticker) {
        if (auto it = trained_.find(ticker); it != trained_.end()) return it->second;
        TrainOutcome outcome =
            cfg_.model == "forecast" ? train_forecast(ticker) : train_classifier_model(ticker);
        return trained_.emplace(ticker, std::move(outcome)).first->second;
    }

private:
    void ensure_out_dir() {
        std::filesystem::create_directories(cfg_.out_dir);
    }

    std::string seed_comment() const { return "# seed=" + std::to_string(cfg_.seed) + "\n"; }
    std::string seed_note() const { return "seed=" + std::to_string(cfg_.seed); }

    void ensure_dataset() {
        if (dataset_loaded_) return;
        cfg_.validate_inputs();

        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(cfg_.prices_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw DataError("no <TICKER>.csv price files in " + cfg_.prices_dir.string());
        }
        headlines_ = textpipe::load_headlines(cfg_.headlines_path);
        for (const auto& file : files) {
            TickerData td;
            td.prices = marketdata::load_prices(file);
            if (td.prices.bars.empty()) {
                throw DataError(file.string() + ": price file has no rows");
            }
            for (const auto& h : headlines_) {
                if (h.ticker == td.prices.ticker) td.headlines.push_back(h);
            }
            std::stable_sort(td.headlines.begin(), td.headlines.end(),
                             [](const auto& a, const auto& b) { return a.date < b.date; });
            tickers_.push_back(std::move(td));
        }
        dataset_loaded_ = true;
    }

    void ensure_resources() {
        if (resources_loaded_) return;
        lexicon_ = textpipe::Lexicon::load(cfg_.lexicon_path);
        verbs_ = textpipe::VerbInventory::load(cfg_.verbs_path);
        verb_map_ = textpipe::VerbMap::load(cfg_.verb_map_path);
        resources_loaded_ = true;
    }

    void ensure_scores() {
        ensure_dataset();
        if (scored_) return;
        scored_ = true;
        ensure_resources();
        for (const auto& h : headlines_) {
            auto tokens = textpipe::tokenize(h.text);
            scores_.push_back(textpipe::sentiment(tokens, lexicon_));
        }
    }

    void ensure_events() {
        ensure_dataset();
        if (events_extracted_) return;
        events_extracted_ = true;
        ensure_resources();
        for (const auto& h : headlines_) {
            std::vector<textpipe::EventTuple> tuples;
            for (auto& e : textpipe::extract_events(h, verbs_)) {
                tuples.push_back(textpipe::generalize(std::move(e), verb_map_));
            }
            event_tuples_.push_back(std::move(tuples));
        }
    }

    /// "" = pooled corpus; otherwise one scope per ticker.
    std::vector<std::string> scopes() {
        ensure_dataset();
        if (!cfg_.per_ticker_corpus) return {""};
        std::vector<std::string> out;
        for (const auto& td : tickers_) out.push_back(td.prices.ticker);
        return out;
    }

    const embeddings::EmbeddingStore& ensure_word_embeddings(const std::string& scope) {
        if (auto it = word_embeddings_.find(scope); it != word_embeddings_.end()) {
            return it->second;
        }
        ensure_dataset();
        std::vector<std::vector<std::string>> corpus;
        for (const auto& h : headlines_) {
            if (!scope.empty() && h.ticker != scope) continue;
            corpus.push_back(textpipe::tokenize(h.text));
        }
        if (corpus.empty()) {
            throw DataError("embed: no headlines in corpus scope '" + scope + "'");
        }
        embeddings::EmbeddingStore store;
        store.vocab = embeddings::Vocabulary::build(corpus, cfg_.min_count);
        embeddings::SkipgramConfig sg;
        sg.dim = cfg_.dim;
        sg.window = cfg_.window;
        sg.negatives = cfg_.negatives;
        sg.epochs = cfg_.sg_epochs;
        sg.seed = detail::derive_seed(cfg_.seed, {scope, "skipgram"});
        store.embeddings = embeddings::train_skipgram(corpus, store.vocab, sg);
        return word_embeddings_.emplace(scope, std::move(store)).first->second;
    }

    const ntn::TrainNtnResult& ensure_ntn(const std::string& scope) {
        if (auto it = ntn_.find(scope); it != ntn_.end()) return it->second;
        ensure_events();
        const auto& store = ensure_word_embeddings(scope);

        std::vector<embeddings::EmbeddedTuple> tuples;
        for (std::size_t i = 0; i < headlines_.size(); ++i) {
            if (!scope.empty() && headlines_[i].ticker != scope) continue;
            if (event_tuples_[i].empty()) continue;
            std::vector<embeddings::EmbeddedTuple> per_headline;
            for (const auto& e : event_tuples_[i]) {
                per_headline.push_back(
                    embeddings::embed_tuple(e, store.embeddings, store.vocab));
            }
            tuples.push_back(embeddings::average_tuples(per_headline));
        }
        if (tuples.empty()) {
            throw DataError("train-ntn: no event tuples in scope '" + scope + "'");
        }
        ntn::TrainNtnConfig cfg;
        cfg.epochs = cfg_.ntn_epochs;
        cfg.batch_size = cfg_.batch_size;
        cfg.learning_rate = cfg_.learning_rate;
        cfg.lambda = cfg_.ntn_lambda;
        cfg.seed = detail::derive_seed(cfg_.seed, {scope, "ntn"});
        auto result = ntn::train_ntn(tuples, store.embeddings, store.vocab, cfg);
        return ntn_.emplace(scope, std::move(result)).first->second;
    }

    const std::vector<ntn::EventEmbedding>& ensure_event_embeddings(const std::string& ticker) {
        if (auto it = event_embeddings_.find(ticker); it != event_embeddings_.end()) {
            return it->second;
        }
        ensure_events();
        const std::string scope = cfg_.per_ticker_corpus ? ticker : std::string();
        const auto& store = ensure_word_embeddings(scope);
        const auto& trained = ensure_ntn(scope);

        std::vector<ntn::EventEmbedding> events;
        for (std::size_t i = 0; i < headlines_.size(); ++i) {
            if (headlines_[i].ticker != ticker) continue;
            if (event_tuples_[i].empty()) continue;
            std::vector<embeddings::EmbeddedTuple> per_headline;
            for (const auto& e : event_tuples_[i]) {
                per_headline.push_back(
                    embeddings::embed_tuple(e, store.embeddings, store.vocab));
            }
            events.push_back(ntn::ntn_forward(embeddings::average_tuples(per_headline),
                                              trained.params));
        }
        std::stable_sort(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.date < b.date; });
        return event_embeddings_.emplace(ticker, std::move(events)).first->second;
    }

    const std::vector<models::AlignedSample>& ensure_samples(const std::string& ticker) {
        if (auto it = samples_.find(ticker); it != samples_.end()) return it->second;
        const auto& events = ensure_event_embeddings(ticker);
        const TickerData* td = nullptr;
        for (const auto& t : tickers()) {
            if (t.prices.ticker == ticker) td = &t;
        }
        if (!td) throw DataError("unknown ticker: " + ticker);
        models::SampleConfig sc;
        sc.dim = cfg_.dim;
        sc.week_capacity = cfg_.week_capacity;
        sc.month_capacity = cfg_.month_capacity;
        sc.lags = cfg_.lags;
        auto samples = models::build_aligned_samples(events, td->prices, sc);
        if (samples.empty()) {
            throw DataError("align: no labeled trading days for " + ticker);
        }
        return samples_.emplace(ticker, std::move(samples)).first->second;
    }

    template <class Net>
    TrainOutcome run_classifier(Net& net, const std::string& ticker,
                                const std::vector<models::AlignedSample>& samples) {
        eval::SplitConfig split;
        split.ratio = cfg_.ratio;
        split.shuffle_train = cfg_.shuffle;
        split.seed = detail::derive_seed(cfg_.seed, {ticker, "split"});
        auto [train_s, test_s] =
            eval::chrono_split(std::span<const models::AlignedSample>(samples), split);

        models::TrainConfig tc;
        tc.epochs = cfg_.epochs;
        tc.batch_size = cfg_.batch_size;
        tc.learning_rate = cfg_.learning_rate;
        tc.shuffle = cfg_.shuffle;
        tc.seed = detail::derive_seed(cfg_.seed, {ticker, "train"});

        TrainOutcome outcome;
        outcome.curves = models::train_classifier(net, train_s, test_s, tc);
        outcome.sample_count = samples.size();
        outcome.train_size = train_s.size();
        outcome.test_size = test_s.size();
        std::size_t ups = 0;
        for (const auto& s : samples) ups += static_cast<std::size_t>(s.label);
        outcome.up_fraction = static_cast<double>(ups) / static_cast<double>(samples.size());

        eval::emit_curves(outcome.curves,
                          cfg_.out_dir / ("curves_" + cfg_.model + "_" + ticker), seed_note());
        auto params = net.parameters();
        ntn::write_checkpoint(cfg_.out_dir / ("model_" + cfg_.model + "_" + ticker + ".ckpt"),
                              cfg_.model, cfg_.dim, 0.0, cfg_.seed, params);
        return outcome;
    }

    TrainOutcome train_classifier_model(const std::string& ticker) {
        const auto& samples = ensure_samples(ticker);
        Rng init(detail::derive_seed(cfg_.seed, {ticker, "init", cfg_.model}));
        if (cfg_.model == "full") {
            models::EbcnnConfig mc;
            mc.dim = cfg_.dim;
            mc.month_channels = cfg_.month_channels;
            mc.week_channels = cfg_.week_channels;
            mc.hidden = cfg_.hidden;
            mc.conv_window = cfg_.conv_window;
            models::FullNetwork net(mc, init);
            return run_classifier(net, ticker, samples);
        }
        if (cfg_.model == "short") {
            models::ShortTermConfig mc;
            mc.dim = cfg_.dim;
            mc.hidden = cfg_.short_hidden;
            models::ShortTermNetwork net(mc, init);
            return run_classifier(net, ticker, samples);
        }
        if (cfg_.model == "lstm") {
            models::EventSequenceClassifier net(cfg_.dim, cfg_.lstm_hidden, init);
            return run_classifier(net, ticker, samples);
        }
        throw UsageError("unknown model '" + cfg_.model + "', expected full|short|lstm|forecast");
    }

    TrainOutcome train_forecast(const std::string& ticker) {
        const TickerData* td = nullptr;
        for (const auto& t : tickers()) {
            if (t.prices.ticker == ticker) td = &t;
        }
        if (!td) throw DataError("unknown ticker: " + ticker);
        const std::size_t s = cfg_.forecast_window, k = cfg_.forecast_horizon;
        if (td->prices.bars.size() < s + k) {
            throw DataError("train: price series for " + ticker + " too short to forecast");
        }
        // normalization statistics stop at the training frontier (no lookahead)
        const std::size_t window_count = td->prices.bars.size() - s - k + 1;
        const std::size_t train_count = eval::split_point(window_count, cfg_.ratio);
        const std::size_t stats_count = train_count == 0 ? 0 : train_count - 1 + s + k;
        auto windows = models::make_forecast_windows(td->prices, s, k, stats_count);
        eval::SplitConfig split;
        split.ratio = cfg_.ratio;
        split.seed = detail::derive_seed(cfg_.seed, {ticker, "split"});
        auto [train_w, test_w] =
            eval::chrono_split(std::span<const models::ForecastWindow>(windows), split);

        Rng init(detail::derive_seed(cfg_.seed, {ticker, "init", "forecast"}));
        auto params = models::ForecasterParams::init(cfg_.forecast_hidden,
                                                     cfg_.forecast_horizon, init);
        models::TrainConfig tc;
        tc.epochs = cfg_.forecast_epochs;
        tc.batch_size = cfg_.batch_size;
        tc.learning_rate = cfg_.learning_rate;
        tc.seed = detail::derive_seed(cfg_.seed, {ticker, "train"});
        auto result = models::train_forecaster(params, train_w, tc);

        TrainOutcome outcome;
        outcome.sample_count = windows.size();
        outcome.train_size = train_w.size();
        outcome.test_size = test_w.size();
        outcome.final_train_mse = result.epoch_mse.back();
        outcome.test_mse = models::forecast_mse(params, test_w);

        std::string csv = seed_comment();
        csv += "epoch,train_mse\n";
        for (std::size_t e = 0; e < result.epoch_mse.size(); ++e) {
            csv += std::to_string(e + 1) + "," + format_double(result.epoch_mse[e]) + "\n";
        }
        write_file(cfg_.out_dir / ("forecast_" + ticker + ".csv"), csv);
        auto tensors = params.parameters();
        ntn::write_checkpoint(cfg_.out_dir / ("model_forecast_" + ticker + ".ckpt"), "forecast",
                              cfg_.forecast_hidden, 0.0, cfg_.seed, tensors);
        return outcome;
    }

    RunConfig cfg_;
    bool dataset_loaded_ = false;
    bool resources_loaded_ = false;
    bool scored_ = false;
    bool events_extracted_ = false;
    std::vector<TickerData> tickers_;
    std::vector<textpipe::Headline> headlines_;
    std::vector<textpipe::SentimentScore> scores_;
    std::vector<std::vector<textpipe::EventTuple>> event_tuples_;
    textpipe::Lexicon lexicon_;
    textpipe::VerbInventory verbs_;
    textpipe::VerbMap verb_map_;
    std::map<std::string, embeddings::EmbeddingStore> word_embeddings_;
    std::map<std::string, ntn::TrainNtnResult> ntn_;
    std::map<std::string, std::vector<ntn::EventEmbedding>> event_embeddings_;
    std::map<std::string, std::vector<models::AlignedSample>> samples_;
    std::map<std::string, TrainOutcome> trained_;
    std::vector<std::string> warnings_;
};

} // namespace evstock::cli
