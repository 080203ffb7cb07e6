#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "evstock/common/errors.hpp"
#include "evstock/marketdata/align.hpp"

namespace evstock::cli {

/// Everything a run needs. Defaults: 100-length embeddings, conv channels
/// (40, 20) with window 3, hidden layers 200/150, Adam batch 50 at lr 0.001,
/// day/week/month lags (1, 7, 30).
struct RunConfig {
    // inputs and outputs
    std::filesystem::path prices_dir;
    std::filesystem::path headlines_path;
    std::filesystem::path lexicon_path;
    std::filesystem::path verbs_path;
    std::filesystem::path verb_map_path;
    std::filesystem::path out_dir = "out";

    // word embeddings
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t sg_epochs = 5;
    std::size_t min_count = 1;

    // event embedding network
    std::size_t ntn_epochs = 500;
    double ntn_lambda = 0.0001;

    // classifiers
    std::size_t epochs = 50;
    std::size_t batch_size = 50;
    double learning_rate = 0.001;
    double ratio = 0.7;
    bool shuffle = false;
    std::string model = "full";
    std::size_t month_channels = 40;
    std::size_t week_channels = 20;
    std::size_t conv_window = 3;
    std::size_t hidden = 200;
    std::size_t short_hidden = 150;
    std::size_t lstm_hidden = 8;
    std::size_t week_capacity = 7;
    std::size_t month_capacity = 30;
    marketdata::Lags lags{};

    // price forecaster
    std::size_t forecast_hidden = 8;
    std::size_t forecast_epochs = 5;
    std::size_t forecast_window = 10;
    std::size_t forecast_horizon = 5;

    // run control
    std::uint64_t seed = 42;
    bool per_ticker_corpus = false; // train word2vec/ntn per ticker instead of pooled

    void validate_inputs() const {
        if (prices_dir.empty()) throw UsageError("missing --prices directory");
        if (headlines_path.empty()) throw UsageError("missing --headlines file");
        if (!std::filesystem::exists(prices_dir)) {
            throw DataError("prices directory not found: " + prices_dir.string());
        }
        if (!std::filesystem::exists(headlines_path)) {
            throw DataError("headlines file not found: " + headlines_path.string());
        }
        for (const auto& [what, path] :
             {std::pair{"lexicon", lexicon_path}, {"verbs", verbs_path},
              {"verb map", verb_map_path}}) {
            if (path.empty() || !std::filesystem::exists(path)) {
                throw DataError(std::string(what) + " file not found: " + path.string());
            }
        }
    }
};

} // namespace evstock::cli
