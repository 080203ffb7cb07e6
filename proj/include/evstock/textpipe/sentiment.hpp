#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>

#include "evstock/common/errors.hpp"
#include "evstock/common/text.hpp"

namespace evstock::textpipe {

/// pos/neg/neu are token proportions and sum to 1; compound is the
/// intensity-normalized valence sum in [-1, 1].
struct SentimentScore {
    double pos = 0.0;
    double neg = 0.0;
    double neu = 1.0;
    double compound = 0.0;
};

/// Flat word -> valence table, valences in [-4, 4]. Replaceable data file:
/// `word<TAB>valence` per line, '#' comments allowed.
class Lexicon {
public:
    static Lexicon load(const std::filesystem::path& path) {
        Lexicon lex;
        auto lines = read_lines(path);
        for (std::size_t li = 0; li < lines.size(); ++li) {
            std::string_view line = trim(lines[li]);
            if (line.empty() || line.front() == '#') continue;
            auto fields = split(line, '\t');
            if (fields.size() != 2) {
                throw DataError(path.string() + ":" + std::to_string(li + 1) +
                                ": expected 'word<TAB>valence'");
            }
            const double v = parse_double(trim(fields[1]), "valence");
            if (v < -4.0 || v > 4.0) {
                throw DataError(path.string() + ":" + std::to_string(li + 1) + ": valence " +
                                format_double(v) + " outside [-4, 4]");
            }
            lex.valence_[std::string(trim(fields[0]))] = v;
        }
        return lex;
    }

    void set(std::string word, double valence) { valence_[std::move(word)] = valence; }

    /// 0 for unmatched words.
    double valence(const std::string& word) const {
        auto it = valence_.find(word);
        return it == valence_.end() ? 0.0 : it->second;
    }

    std::size_t size() const { return valence_.size(); }

private:
    std::unordered_map<std::string, double> valence_;
};

/// Sum-of-valences sentiment with the s/sqrt(s^2+15) intensity
/// normalization. pos/neg/neu count tokens with positive/negative/zero
/// valence; an empty token list scores fully neutral.
inline SentimentScore sentiment(std::span<const std::string> tokens, const Lexicon& lexicon) {
    SentimentScore score;
    if (tokens.empty()) return score;

    double valence_sum = 0.0;
    std::size_t positive = 0, negative = 0;
    for (const auto& token : tokens) {
        const double v = lexicon.valence(token);
        valence_sum += v;
        if (v > 0.0) {
            ++positive;
        } else if (v < 0.0) {
            ++negative;
        }
    }
    const double n = static_cast<double>(tokens.size());
    score.pos = static_cast<double>(positive) / n;
    score.neg = static_cast<double>(negative) / n;
    score.neu = static_cast<double>(tokens.size() - positive - negative) / n;
    score.compound = valence_sum / std::sqrt(valence_sum * valence_sum + 15.0);
    return score;
}

} // namespace evstock::textpipe
