#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "evstock/common/errors.hpp"
#include "evstock/common/rng.hpp"

namespace evstock::nnkit {

using Shape = std::vector<std::size_t>;

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

inline std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

/// Dense row-major 64-bit tensor. Doubles as a node in the reverse-mode
/// tape: ops record their inputs in `parents` and a `backprop` closure
/// that routes `grad` to them. Leaves created with requires_grad carry a
/// persistent gradient buffer that accumulates until zero_grad().
class Tensor {
public:
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad; // same length as data iff requires_grad
    bool requires_grad = false;
    std::string name;

    std::vector<TensorPtr> parents;
    std::function<void(Tensor&)> backprop;

    std::size_t size() const { return data.size(); }
};

inline TensorPtr make_tensor(Shape shape, std::vector<double> data, bool requires_grad = false,
                             std::string name = {}) {
    if (numel(shape) != data.size()) {
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data = std::move(data);
    t->requires_grad = requires_grad;
    t->name = std::move(name);
    if (requires_grad) t->grad.assign(t->data.size(), 0.0);
    return t;
}

inline TensorPtr zeros(Shape shape, bool requires_grad = false, std::string name = {}) {
    std::vector<double> data(numel(shape), 0.0);
    return make_tensor(std::move(shape), std::move(data), requires_grad, std::move(name));
}

inline TensorPtr full(Shape shape, double value, bool requires_grad = false) {
    std::vector<double> data(numel(shape), value);
    return make_tensor(std::move(shape), std::move(data), requires_grad);
}

inline TensorPtr scalar(double value) { return make_tensor({1}, {value}); }

inline TensorPtr vector_tensor(std::vector<double> values, bool requires_grad = false) {
    Shape shape{values.size()};
    return make_tensor(std::move(shape), std::move(values), requires_grad);
}

/// Trainable leaf initialized uniform in [-r, r], r = sqrt(6/(fan_in+fan_out)).
inline TensorPtr glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng,
                                std::string name = {}) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> data(numel(shape));
    for (double& v : data) v = rng.uniform(-r, r);
    return make_tensor(std::move(shape), std::move(data), /*requires_grad=*/true,
                       std::move(name));
}

/// Shared helper used by every op: output requires grad iff some parent does.
/// Constant outputs keep no parents, so inference tapes stay flat.
inline TensorPtr make_node(Shape shape, std::vector<double> data,
                           std::vector<TensorPtr> parents) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data = std::move(data);
    for (const auto& p : parents) {
        if (p->requires_grad) {
            t->requires_grad = true;
            break;
        }
    }
    if (t->requires_grad) {
        t->grad.assign(t->data.size(), 0.0);
        t->parents = std::move(parents);
    }
    return t;
}

/// Reverse pass from a scalar root. Each node's closure runs after all of
/// its consumers, so accumulation into shared parameters is complete.
inline void backward(const TensorPtr& root) {
    if (root->size() != 1) {
        throw ShapeError("backward: root must be a scalar, got " + shape_str(root->shape));
    }
    if (!root->requires_grad) return;

    std::vector<Tensor*> order;
    std::unordered_set<Tensor*> visited;
    std::vector<std::pair<Tensor*, std::size_t>> stack;
    visited.insert(root.get());
    stack.emplace_back(root.get(), 0);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backprop) (*it)->backprop(**it);
    }
}

inline void zero_grad(std::span<const TensorPtr> params) {
    for (const auto& p : params) {
        if (p->requires_grad) std::fill(p->grad.begin(), p->grad.end(), 0.0);
    }
}

inline bool all_finite(const Tensor& t) {
    for (double v : t.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace evstock::nnkit
