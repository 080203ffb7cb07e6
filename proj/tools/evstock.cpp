#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evstock/cli/config.hpp"
#include "evstock/cli/pipeline.hpp"

#ifndef EVSTOCK_DATA_DIR
#define EVSTOCK_DATA_DIR "data"
#endif

using namespace evstock;

int main(int argc, char** argv) {
    CLI::App app{"event-driven stock movement prediction toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file; flags win");

    cli::RunConfig config;
    std::string prices, headlines, out = "out";
    std::string lexicon = std::string(EVSTOCK_DATA_DIR) + "/lexicon.txt";
    std::string verbs = std::string(EVSTOCK_DATA_DIR) + "/verbs.txt";
    std::string verb_map = std::string(EVSTOCK_DATA_DIR) + "/verb_categories.txt";

    app.add_option("--prices", prices, "directory of <TICKER>.csv price files");
    app.add_option("--headlines", headlines, "tab-separated date/ticker/headline file");
    app.add_option("--lexicon", lexicon, "sentiment word valence file");
    app.add_option("--verbs", verbs, "verb inventory file");
    app.add_option("--verb-map", verb_map, "surface-to-category verb map file");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", config.seed, "master seed recorded in every artifact");
    app.add_option("--ratio", config.ratio, "chronological train fraction");
    app.add_flag("--shuffle", config.shuffle, "shuffle training order (membership unchanged)");
    app.add_option("--epochs", config.epochs, "classifier training epochs");
    app.add_option("--model", config.model, "full|short|lstm|forecast")
        ->check(CLI::IsMember({"full", "short", "lstm", "forecast"}));

    app.add_option("--dim", config.dim, "word/event embedding length");
    app.add_option("--sg-window", config.window, "skip-gram context window");
    app.add_option("--negatives", config.negatives, "skip-gram negative samples");
    app.add_option("--sg-epochs", config.sg_epochs, "skip-gram epochs");
    app.add_option("--min-count", config.min_count, "vocabulary frequency cutoff");
    app.add_option("--ntn-epochs", config.ntn_epochs, "event network training epochs");
    app.add_option("--ntn-lambda", config.ntn_lambda, "event network l2 weight");
    app.add_option("--batch", config.batch_size, "mini-batch size");
    app.add_option("--lr", config.learning_rate, "Adam learning rate");
    app.add_option("--month-channels", config.month_channels, "monthly conv channels");
    app.add_option("--week-channels", config.week_channels, "weekly conv channels");
    app.add_option("--conv-window", config.conv_window, "conv window size");
    app.add_option("--hidden", config.hidden, "full-network hidden layer size");
    app.add_option("--short-hidden", config.short_hidden, "short-term hidden layer size");
    app.add_option("--lstm-hidden", config.lstm_hidden, "event LSTM hidden units");
    app.add_option("--week-cap", config.week_capacity, "week sequence capacity");
    app.add_option("--month-cap", config.month_capacity, "month sequence capacity");
    app.add_option("--day-lag", config.lags.day, "prediction horizon in days");
    app.add_option("--week-lag", config.lags.week, "week horizon span in days");
    app.add_option("--month-lag", config.lags.month, "month horizon span in days");
    app.add_option("--forecast-hidden", config.forecast_hidden, "forecaster LSTM hidden units");
    app.add_option("--forecast-epochs", config.forecast_epochs, "forecaster training epochs");
    app.add_option("--forecast-window", config.forecast_window, "forecaster input window s");
    app.add_option("--forecast-horizon", config.forecast_horizon, "forecast steps k");
    app.add_flag("--per-ticker", config.per_ticker_corpus,
                 "train word2vec and the event network per ticker instead of pooled");

    auto* cmd_ingest = app.add_subcommand("ingest", "validate inputs, write manifest.json");
    auto* cmd_sentiment = app.add_subcommand("sentiment", "score headlines, write sentiment.csv");
    auto* cmd_events = app.add_subcommand("events", "extract event tuples, write events.tsv");
    auto* cmd_embed = app.add_subcommand("embed", "train word embeddings, write the store");
    auto* cmd_train_ntn =
        app.add_subcommand("train-ntn", "train the event embedding network checkpoint");
    auto* cmd_align = app.add_subcommand("align", "align horizons and labels per trading day");
    auto* cmd_train = app.add_subcommand("train", "train the selected model, write curves");
    auto* cmd_evaluate = app.add_subcommand("evaluate", "write per-ticker evaluation reports");
    auto* cmd_correlate =
        app.add_subcommand("correlate", "sentiment/price lag correlation tables");
    auto* cmd_pipeline = app.add_subcommand("pipeline", "run the whole chain end to end");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    config.prices_dir = prices;
    config.headlines_path = headlines;
    config.lexicon_path = lexicon;
    config.verbs_path = verbs;
    config.verb_map_path = verb_map;
    config.out_dir = out;

    try {
        cli::Pipeline pipeline(config);
        if (*cmd_ingest) pipeline.ingest();
        if (*cmd_sentiment) pipeline.sentiment();
        if (*cmd_events) pipeline.events();
        if (*cmd_embed) pipeline.embed();
        if (*cmd_train_ntn) pipeline.train_ntn();
        if (*cmd_align) pipeline.align();
        if (*cmd_train) pipeline.train();
        if (*cmd_evaluate) pipeline.evaluate();
        if (*cmd_correlate) pipeline.correlate();
        if (*cmd_pipeline) pipeline.run_all();
        for (const auto& w : pipeline.warnings()) std::cerr << "warning: " << w << "\n";
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
