#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "evstock/common/errors.hpp"

namespace evstock::embeddings {

/// Word <-> contiguous index mapping with frequency counts. Index order is
/// deterministic: descending frequency, ties broken lexicographically.
class Vocabulary {
public:
    static Vocabulary build(std::span<const std::vector<std::string>> corpus,
                            std::size_t min_count) {
        if (min_count < 1) throw DataError("build_vocab: min_count must be >= 1");
        std::map<std::string, std::size_t> counts; // ordered for determinism
        std::size_t total = 0;
        for (const auto& sentence : corpus) {
            for (const auto& word : sentence) {
                ++counts[word];
                ++total;
            }
        }
        if (total == 0) throw DataError("build_vocab: empty corpus");

        std::vector<std::pair<std::string, std::size_t>> kept;
        for (auto& [word, count] : counts) {
            if (count >= min_count) kept.emplace_back(word, count);
        }
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });

        Vocabulary vocab;
        for (auto& [word, count] : kept) {
            vocab.index_[word] = vocab.words_.size();
            vocab.words_.push_back(word);
            vocab.freq_.push_back(count);
        }
        return vocab;
    }

    /// Rebuilds a vocabulary from a stored word list (frequencies unknown).
    static Vocabulary from_words(std::vector<std::string> words) {
        Vocabulary vocab;
        for (auto& w : words) {
            vocab.index_[w] = vocab.words_.size();
            vocab.words_.push_back(std::move(w));
            vocab.freq_.push_back(1);
        }
        return vocab;
    }

    std::optional<std::size_t> index_of(const std::string& word) const {
        auto it = index_.find(word);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& word(std::size_t index) const { return words_.at(index); }
    std::size_t frequency(std::size_t index) const { return freq_.at(index); }
    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> words_;
    std::vector<std::size_t> freq_;
};

} // namespace evstock::embeddings
