#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evstock/common/date.hpp"
#include "evstock/common/errors.hpp"
#include "evstock/common/text.hpp"
#include "evstock/embeddings/skipgram.hpp"
#include "evstock/embeddings/vocab.hpp"
#include "evstock/textpipe/events.hpp"

namespace evstock::embeddings {

/// Word-vector triple for one event tuple's slots.
struct EmbeddedTuple {
    std::vector<double> actor;  // O1
    std::vector<double> action; // P
    std::vector<double> object; // O2
    Date date;
};

/// Mean of the in-vocabulary token vectors; zero vector when every token is
/// out of vocabulary.
inline std::vector<double> phrase_embed(std::span<const std::string> tokens,
                                        const WordEmbeddings& embeddings,
                                        const Vocabulary& vocab) {
    std::vector<double> out(embeddings.dim, 0.0);
    std::size_t matched = 0;
    for (const auto& token : tokens) {
        if (auto idx = vocab.index_of(token)) {
            auto row = embeddings.row(*idx);
            for (std::size_t i = 0; i < embeddings.dim; ++i) out[i] += row[i];
            ++matched;
        }
    }
    if (matched > 0) {
        for (double& v : out) v /= static_cast<double>(matched);
    }
    return out;
}

inline EmbeddedTuple embed_tuple(const textpipe::EventTuple& event,
                                 const WordEmbeddings& embeddings, const Vocabulary& vocab) {
    EmbeddedTuple t;
    t.actor = phrase_embed(event.actor, embeddings, vocab);
    std::vector<std::string> action{event.action};
    t.action = phrase_embed(action, embeddings, vocab);
    t.object = phrase_embed(event.object, embeddings, vocab);
    t.date = event.date;
    return t;
}

/// Slot-wise arithmetic mean of same-date tuples.
inline EmbeddedTuple average_tuples(std::span<const EmbeddedTuple> tuples) {
    if (tuples.empty()) throw DataError("average_tuples: empty tuple list");
    const std::size_t d = tuples[0].actor.size();
    EmbeddedTuple mean;
    mean.actor.assign(d, 0.0);
    mean.action.assign(d, 0.0);
    mean.object.assign(d, 0.0);
    mean.date = tuples[0].date;
    for (const auto& t : tuples) {
        if (t.date != mean.date) {
            throw DataError("average_tuples: mixed dates " + mean.date.to_string() + " and " +
                            t.date.to_string());
        }
        for (std::size_t i = 0; i < d; ++i) {
            mean.actor[i] += t.actor[i];
            mean.action[i] += t.action[i];
            mean.object[i] += t.object[i];
        }
    }
    const double n = static_cast<double>(tuples.size());
    for (std::size_t i = 0; i < d; ++i) {
        mean.actor[i] /= n;
        mean.action[i] /= n;
        mean.object[i] /= n;
    }
    return mean;
}

/// Text store: header `|V| d`, then `word v1 ... vd` lines. Values use
/// shortest round-trip formatting, so save/load is exact at 64-bit
/// precision.
inline void save_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                            const WordEmbeddings& embeddings) {
    if (vocab.size() != embeddings.vocab_size()) {
        throw DataError("save_embeddings: vocabulary size " + std::to_string(vocab.size()) +
                        " does not match embedding rows " +
                        std::to_string(embeddings.vocab_size()));
    }
    std::string out = std::to_string(vocab.size()) + " " + std::to_string(embeddings.dim) + "\n";
    for (std::size_t w = 0; w < vocab.size(); ++w) {
        out += vocab.word(w);
        for (double v : embeddings.row(w)) {
            out += ' ';
            out += format_double(v);
        }
        out += '\n';
    }
    write_file(path, out);
}

struct EmbeddingStore {
    Vocabulary vocab;
    WordEmbeddings embeddings;
};

inline EmbeddingStore load_embeddings(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": empty embedding store");
    auto header = split(trim(lines[0]), ' ');
    if (header.size() != 2) {
        throw DataError(path.string() + ":1: expected '|V| d' header");
    }
    const std::size_t count = static_cast<std::size_t>(parse_long(header[0], "vocab size"));
    const std::size_t dim = static_cast<std::size_t>(parse_long(header[1], "dimension"));
    if (lines.size() != count + 1) {
        throw DataError(path.string() + ": header declares " + std::to_string(count) +
                        " words, file has " + std::to_string(lines.size() - 1));
    }
    EmbeddingStore store;
    store.embeddings.dim = dim;
    store.embeddings.table.reserve(count * dim);
    std::vector<std::string> words;
    words.reserve(count);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto fields = split(trim(lines[li]), ' ');
        if (fields.size() != dim + 1) {
            throw DataError(path.string() + ":" + std::to_string(li + 1) + ": expected " +
                            std::to_string(dim + 1) + " fields");
        }
        words.emplace_back(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            store.embeddings.table.push_back(parse_double(fields[i], "embedding value"));
        }
    }
    store.vocab = Vocabulary::from_words(std::move(words));
    return store;
}

} // namespace evstock::embeddings
