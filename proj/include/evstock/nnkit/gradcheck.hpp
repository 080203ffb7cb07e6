#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evstock/nnkit/tensor.hpp"

namespace evstock::nnkit {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    bool passed = false;
};

/// Compares the reverse-mode gradient of a scalar loss against central
/// finite differences. loss_fn must rebuild the tape from the current
/// parameter values on every call.
template <class LossFn>
GradCheckReport grad_check(LossFn&& loss_fn, std::span<const TensorPtr> params, double tolerance,
                           double step = 1e-5) {
    zero_grad(params);
    TensorPtr loss = loss_fn();
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p->grad);

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double saved = p->data[i];
            p->data[i] = saved + step;
            const double up = loss_fn()->data[0];
            p->data[i] = saved - step;
            const double down = loss_fn()->data[0];
            p->data[i] = saved;

            const double fd = (up - down) / (2.0 * step);
            const double an = analytic[pi][i];
            // scale floor keeps near-zero gradients from reading as failures
            const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p->name.empty() ? "param" + std::to_string(pi) : p->name;
                report.worst_index = i;
            }
        }
    }
    report.passed = report.max_rel_error < tolerance;
    return report;
}

} // namespace evstock::nnkit
