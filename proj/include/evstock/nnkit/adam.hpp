#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evstock/nnkit/tensor.hpp"

namespace evstock::nnkit {

/// Adam with bias correction. Moment buffers are laid out per parameter and
/// must match shapes exactly; step_count advances by one per update.
struct AdamState {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    static AdamState create(std::span<const TensorPtr> params, double learning_rate = 0.001) {
        AdamState st;
        st.learning_rate = learning_rate;
        st.first_moment.reserve(params.size());
        st.second_moment.reserve(params.size());
        for (const auto& p : params) {
            st.first_moment.emplace_back(p->size(), 0.0);
            st.second_moment.emplace_back(p->size(), 0.0);
        }
        return st;
    }
};

inline void adam_step(std::span<const TensorPtr> params, AdamState& state) {
    if (state.first_moment.size() != params.size()) {
        throw ShapeError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                         " parameters, got " + std::to_string(params.size()));
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        auto& m = state.first_moment[pi];
        auto& v = state.second_moment[pi];
        if (m.size() != p->size()) {
            throw ShapeError("adam_step: moment buffer size " + std::to_string(m.size()) +
                             " does not match parameter " +
                             (p->name.empty() ? shape_str(p->shape) : p->name));
        }
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double g = p->grad[i];
            if (!std::isfinite(g)) {
                throw NumericError("adam_step: non-finite gradient in parameter '" +
                                   (p->name.empty() ? "<unnamed> " + shape_str(p->shape)
                                                    : p->name) +
                                   "' at index " + std::to_string(i));
            }
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p->data[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace evstock::nnkit
