#pragma once

#include <cmath>
#include <span>
#include <string>

#include "evstock/common/errors.hpp"

namespace evstock::eval {

/// Fraction of exact matches between binary prediction and label lists.
inline double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw DataError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw DataError("accuracy: empty lists");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

/// Two-pass Pearson correlation coefficient. Constant series have no
/// defined correlation and are rejected.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DataError("pearson: length mismatch " + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()));
    }
    if (x.size() < 2) throw DataError("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) {
        throw DataError("pearson: correlation undefined for a constant series");
    }
    return cov / std::sqrt(var_x * var_y);
}

} // namespace evstock::eval
