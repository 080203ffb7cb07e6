#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "evstock/common/errors.hpp"
#include "evstock/common/rng.hpp"

namespace evstock::eval {

struct SplitConfig {
    double ratio = 0.7;        // fraction of the earliest samples that train
    bool shuffle_train = false; // permute train order; membership unchanged
    std::uint64_t seed = 0;
};

/// Number of leading samples that train under the given ratio.
inline std::size_t split_point(std::size_t n, double ratio) {
    if (ratio <= 0.0 || ratio >= 1.0) {
        throw UsageError("chrono_split: ratio must lie in (0, 1)");
    }
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

/// Chronological split: the first floor(ratio * n) samples train, the most
/// recent remainder tests. Shuffling permutes only the train order, so no
/// test sample ever predates a train sample.
template <class T>
std::pair<std::vector<T>, std::vector<T>> chrono_split(std::span<const T> samples,
                                                       const SplitConfig& config) {
    const std::size_t n = samples.size();
    const std::size_t train_n = split_point(n, config.ratio);
    if (train_n == 0 || train_n == n) {
        throw DataError("chrono_split: ratio " + std::to_string(config.ratio) + " over " +
                        std::to_string(n) + " samples leaves an empty side");
    }
    std::vector<T> train(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(train_n));
    std::vector<T> test(samples.begin() + static_cast<std::ptrdiff_t>(train_n), samples.end());
    if (config.shuffle_train) {
        Rng rng = Rng(config.seed).derive("chrono-split");
        rng.shuffle(train);
    }
    return {std::move(train), std::move(test)};
}

} // namespace evstock::eval
