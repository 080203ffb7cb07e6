#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "evstock/nnkit/tensor.hpp"

namespace evstock::nnkit {

namespace detail {

inline void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) + " vs " +
                         shape_str(b->shape));
    }
}

inline void require_vector(const TensorPtr& x, const char* op) {
    if (x->shape.size() != 1 || x->size() == 0) {
        throw ShapeError(std::string(op) + ": expected non-empty vector, got " +
                         shape_str(x->shape));
    }
}

inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace detail

inline TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    detail::require_same_shape(a, b, "add");
    std::vector<double> out(a->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->data[i] + b->data[i];
    auto node = make_node(a->shape, std::move(out), {a, b});
    if (node->requires_grad) {
        node->backprop = [a, b](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                if (a->requires_grad) a->grad[i] += self.grad[i];
                if (b->requires_grad) b->grad[i] += self.grad[i];
            }
        };
    }
    return node;
}

inline TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
    detail::require_same_shape(a, b, "sub");
    std::vector<double> out(a->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->data[i] - b->data[i];
    auto node = make_node(a->shape, std::move(out), {a, b});
    if (node->requires_grad) {
        node->backprop = [a, b](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                if (a->requires_grad) a->grad[i] += self.grad[i];
                if (b->requires_grad) b->grad[i] -= self.grad[i];
            }
        };
    }
    return node;
}

inline TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    detail::require_same_shape(a, b, "mul");
    std::vector<double> out(a->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->data[i] * b->data[i];
    auto node = make_node(a->shape, std::move(out), {a, b});
    if (node->requires_grad) {
        node->backprop = [a, b](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                if (a->requires_grad) a->grad[i] += self.grad[i] * b->data[i];
                if (b->requires_grad) b->grad[i] += self.grad[i] * a->data[i];
            }
        };
    }
    return node;
}

/// Elementwise k*x + c.
inline TensorPtr affine(const TensorPtr& x, double k, double c) {
    std::vector<double> out(x->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = k * x->data[i] + c;
    auto node = make_node(x->shape, std::move(out), {x});
    if (node->requires_grad) {
        node->backprop = [x, k](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) x->grad[i] += k * self.grad[i];
        };
    }
    return node;
}

inline TensorPtr scale(const TensorPtr& x, double k) { return affine(x, k, 0.0); }
inline TensorPtr neg(const TensorPtr& x) { return affine(x, -1.0, 0.0); }

inline TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0]) {
        throw ShapeError("matmul: incompatible shapes " + shape_str(a->shape) + " x " +
                         shape_str(b->shape));
    }
    const std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a->data[i * k + p];
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * b->data[p * n + j];
        }
    }
    auto node = make_node({m, n}, std::move(out), {a, b});
    if (node->requires_grad) {
        node->backprop = [a, b, m, k, n](Tensor& self) {
            if (a->requires_grad) { // dA = G * B^T
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < n; ++j) {
                            acc += self.grad[i * n + j] * b->data[p * n + j];
                        }
                        a->grad[i * k + p] += acc;
                    }
                }
            }
            if (b->requires_grad) { // dB = A^T * G
                for (std::size_t p = 0; p < k; ++p) {
                    for (std::size_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < m; ++i) {
                            acc += a->data[i * k + p] * self.grad[i * n + j];
                        }
                        b->grad[p * n + j] += acc;
                    }
                }
            }
        };
    }
    return node;
}

/// w[m,n] * x[n] -> [m]
inline TensorPtr matvec(const TensorPtr& w, const TensorPtr& x) {
    if (w->shape.size() != 2 || x->shape.size() != 1 || w->shape[1] != x->shape[0]) {
        throw ShapeError("matvec: incompatible shapes " + shape_str(w->shape) + " x " +
                         shape_str(x->shape));
    }
    const std::size_t m = w->shape[0], n = w->shape[1];
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += w->data[i * n + j] * x->data[j];
        out[i] = acc;
    }
    auto node = make_node({m}, std::move(out), {w, x});
    if (node->requires_grad) {
        node->backprop = [w, x, m, n](Tensor& self) {
            for (std::size_t i = 0; i < m; ++i) {
                const double g = self.grad[i];
                if (g == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (w->requires_grad) w->grad[i * n + j] += g * x->data[j];
                    if (x->requires_grad) x->grad[j] += g * w->data[i * n + j];
                }
            }
        };
    }
    return node;
}

inline TensorPtr dot(const TensorPtr& a, const TensorPtr& b) {
    detail::require_vector(a, "dot");
    detail::require_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a->size(); ++i) acc += a->data[i] * b->data[i];
    auto node = make_node({1}, {acc}, {a, b});
    if (node->requires_grad) {
        node->backprop = [a, b](Tensor& self) {
            const double g = self.grad[0];
            for (std::size_t i = 0; i < a->size(); ++i) {
                if (a->requires_grad) a->grad[i] += g * b->data[i];
                if (b->requires_grad) b->grad[i] += g * a->data[i];
            }
        };
    }
    return node;
}

inline TensorPtr sum(const TensorPtr& x) {
    double acc = 0.0;
    for (double v : x->data) acc += v;
    auto node = make_node({1}, {acc}, {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += self.grad[0];
        };
    }
    return node;
}

inline TensorPtr mean(const TensorPtr& x) {
    detail::require_vector(x, "mean");
    return scale(sum(x), 1.0 / static_cast<double>(x->size()));
}

inline TensorPtr sum_squares(const TensorPtr& x) {
    double acc = 0.0;
    for (double v : x->data) acc += v * v;
    auto node = make_node({1}, {acc}, {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            const double g = self.grad[0];
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += 2.0 * g * x->data[i];
        };
    }
    return node;
}

inline TensorPtr sigmoid(const TensorPtr& x) {
    std::vector<double> out(x->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::stable_sigmoid(x->data[i]);
    auto node = make_node(x->shape, std::move(out), {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                const double y = self.data[i];
                x->grad[i] += self.grad[i] * y * (1.0 - y);
            }
        };
    }
    return node;
}

inline TensorPtr tanh(const TensorPtr& x) {
    std::vector<double> out(x->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x->data[i]);
    auto node = make_node(x->shape, std::move(out), {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                const double y = self.data[i];
                x->grad[i] += self.grad[i] * (1.0 - y * y);
            }
        };
    }
    return node;
}

inline TensorPtr relu(const TensorPtr& x) {
    std::vector<double> out(x->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, x->data[i]);
    auto node = make_node(x->shape, std::move(out), {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                if (x->data[i] > 0.0) x->grad[i] += self.grad[i];
            }
        };
    }
    return node;
}

inline TensorPtr log(const TensorPtr& x) {
    std::vector<double> out(x->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(x->data[i]);
    auto node = make_node(x->shape, std::move(out), {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            for (std::size_t i = 0; i < self.size(); ++i) {
                x->grad[i] += self.grad[i] / x->data[i];
            }
        };
    }
    return node;
}

/// Vector softmax, max-subtracted. Shift-invariant, sums to 1.
inline TensorPtr softmax(const TensorPtr& x) {
    detail::require_vector(x, "softmax");
    const double mx = *std::max_element(x->data.begin(), x->data.end());
    std::vector<double> out(x->size());
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(x->data[i] - mx);
        total += out[i];
    }
    for (double& v : out) v /= total;
    auto node = make_node(x->shape, std::move(out), {x});
    if (node->requires_grad) {
        node->backprop = [x](Tensor& self) {
            double inner = 0.0;
            for (std::size_t i = 0; i < self.size(); ++i) inner += self.grad[i] * self.data[i];
            for (std::size_t i = 0; i < self.size(); ++i) {
                x->grad[i] += self.data[i] * (self.grad[i] - inner);
            }
        };
    }
    return node;
}

inline TensorPtr concat(const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    std::vector<double> out;
    for (const auto& p : parts) {
        detail::require_vector(p, "concat");
        out.insert(out.end(), p->data.begin(), p->data.end());
    }
    const std::size_t total = out.size();
    auto node = make_node({total}, std::move(out), parts);
    if (node->requires_grad) {
        node->backprop = [parts](Tensor& self) {
            std::size_t offset = 0;
            for (const auto& p : parts) {
                if (p->requires_grad) {
                    for (std::size_t i = 0; i < p->size(); ++i) {
                        p->grad[i] += self.grad[offset + i];
                    }
                }
                offset += p->size();
            }
        };
    }
    return node;
}

/// Selects one element of a vector as a scalar node.
inline TensorPtr pick(const TensorPtr& x, std::size_t index) {
    detail::require_vector(x, "pick");
    if (index >= x->size()) {
        throw ShapeError("pick: index " + std::to_string(index) + " out of range for " +
                         shape_str(x->shape));
    }
    auto node = make_node({1}, {x->data[index]}, {x});
    if (node->requires_grad) {
        node->backprop = [x, index](Tensor& self) { x->grad[index] += self.grad[0]; };
    }
    return node;
}

struct Conv1d {
    TensorPtr features;         // [L-w+1, d_out]
    std::size_t valid_positions; // rows whose window lies inside valid_len
};

/// Valid-window 1-D convolution over a [L, d_in] sequence with a
/// [w, d_in, d_out] kernel. Rows at positions >= valid_positions come from
/// windows that reach into padding and must be ignored by pooling.
inline Conv1d conv1d(const TensorPtr& seq, const TensorPtr& kernel, std::size_t valid_len,
                     const TensorPtr& bias = nullptr) {
    if (seq->shape.size() != 2 || kernel->shape.size() != 3 ||
        seq->shape[1] != kernel->shape[1]) {
        throw ShapeError("conv1d: incompatible shapes " + shape_str(seq->shape) + " and " +
                         shape_str(kernel->shape));
    }
    const std::size_t len = seq->shape[0], din = seq->shape[1];
    const std::size_t w = kernel->shape[0], dout = kernel->shape[2];
    if (len < w) {
        throw ShapeError("conv1d: sequence length " + std::to_string(len) +
                         " shorter than window " + std::to_string(w) + "; zero-pad first");
    }
    if (valid_len > len) {
        throw ShapeError("conv1d: valid_len " + std::to_string(valid_len) + " exceeds length " +
                         std::to_string(len));
    }
    if (bias && bias->shape != Shape{dout}) {
        throw ShapeError("conv1d: bias shape " + shape_str(bias->shape) + ", expected [" +
                         std::to_string(dout) + "]");
    }
    const std::size_t out_len = len - w + 1;
    std::vector<double> out(out_len * dout, 0.0);
    for (std::size_t t = 0; t < out_len; ++t) {
        for (std::size_t u = 0; u < w; ++u) {
            for (std::size_t c = 0; c < din; ++c) {
                const double sv = seq->data[(t + u) * din + c];
                if (sv == 0.0) continue;
                for (std::size_t o = 0; o < dout; ++o) {
                    out[t * dout + o] += sv * kernel->data[(u * din + c) * dout + o];
                }
            }
        }
        if (bias) {
            for (std::size_t o = 0; o < dout; ++o) out[t * dout + o] += bias->data[o];
        }
    }
    std::vector<TensorPtr> parents{seq, kernel};
    if (bias) parents.push_back(bias);
    auto node = make_node({out_len, dout}, std::move(out), std::move(parents));
    if (node->requires_grad) {
        node->backprop = [seq, kernel, bias, out_len, w, din, dout](Tensor& self) {
            for (std::size_t t = 0; t < out_len; ++t) {
                for (std::size_t o = 0; o < dout; ++o) {
                    const double g = self.grad[t * dout + o];
                    if (g == 0.0) continue;
                    if (bias && bias->requires_grad) bias->grad[o] += g;
                    for (std::size_t u = 0; u < w; ++u) {
                        for (std::size_t c = 0; c < din; ++c) {
                            const std::size_t ki = (u * din + c) * dout + o;
                            if (seq->requires_grad) {
                                seq->grad[(t + u) * din + c] += g * kernel->data[ki];
                            }
                            if (kernel->requires_grad) {
                                kernel->grad[ki] += g * seq->data[(t + u) * din + c];
                            }
                        }
                    }
                }
            }
        };
    }
    const std::size_t valid = valid_len >= w ? std::min(valid_len - w + 1, out_len) : 0;
    return Conv1d{node, valid};
}

/// Per-channel max over the first valid_positions rows of a [L, d] sequence.
/// valid_positions == 0 yields the zero vector; gradient flows only to the
/// argmax row of each channel.
inline TensorPtr maxpool_time(const TensorPtr& seq, std::size_t valid_positions) {
    if (seq->shape.size() != 2) {
        throw ShapeError("maxpool_time: expected [L,d] sequence, got " + shape_str(seq->shape));
    }
    const std::size_t len = seq->shape[0], d = seq->shape[1];
    if (valid_positions > len) {
        throw ShapeError("maxpool_time: valid_positions " + std::to_string(valid_positions) +
                         " exceeds length " + std::to_string(len));
    }
    if (valid_positions == 0) return zeros({d});

    std::vector<double> out(d);
    std::vector<std::size_t> argmax(d, 0);
    for (std::size_t c = 0; c < d; ++c) {
        double best = seq->data[c];
        std::size_t best_t = 0;
        for (std::size_t t = 1; t < valid_positions; ++t) {
            const double v = seq->data[t * d + c];
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        out[c] = best;
        argmax[c] = best_t;
    }
    auto node = make_node({d}, std::move(out), {seq});
    if (node->requires_grad) {
        node->backprop = [seq, argmax, d](Tensor& self) {
            for (std::size_t c = 0; c < d; ++c) {
                seq->grad[argmax[c] * d + c] += self.grad[c];
            }
        };
    }
    return node;
}

/// out[i] = a^T * T_i * b over a [d,d,d] stack of bilinear forms.
inline TensorPtr bilinear(const TensorPtr& t, const TensorPtr& a, const TensorPtr& b) {
    if (t->shape.size() != 3 || a->shape.size() != 1 || b->shape.size() != 1 ||
        t->shape[1] != a->shape[0] || t->shape[2] != b->shape[0]) {
        throw ShapeError("bilinear: incompatible shapes " + shape_str(t->shape) + ", " +
                         shape_str(a->shape) + ", " + shape_str(b->shape));
    }
    const std::size_t n = t->shape[0], da = t->shape[1], db = t->shape[2];
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* ti = t->data.data() + i * da * db;
        for (std::size_t j = 0; j < da; ++j) {
            const double av = a->data[j];
            if (av == 0.0) continue;
            for (std::size_t k = 0; k < db; ++k) acc += av * ti[j * db + k] * b->data[k];
        }
        out[i] = acc;
    }
    auto node = make_node({n}, std::move(out), {t, a, b});
    if (node->requires_grad) {
        node->backprop = [t, a, b, n, da, db](Tensor& self) {
            for (std::size_t i = 0; i < n; ++i) {
                const double g = self.grad[i];
                if (g == 0.0) continue;
                const double* ti = t->data.data() + i * da * db;
                for (std::size_t j = 0; j < da; ++j) {
                    const double av = a->data[j];
                    for (std::size_t k = 0; k < db; ++k) {
                        const double bv = b->data[k];
                        if (t->requires_grad) t->grad[i * da * db + j * db + k] += g * av * bv;
                        if (a->requires_grad) a->grad[j] += g * ti[j * db + k] * bv;
                        if (b->requires_grad) b->grad[k] += g * ti[j * db + k] * av;
                    }
                }
            }
        };
    }
    return node;
}

/// Numerically stable binary cross-entropy on a scalar logit.
inline TensorPtr bce_with_logits(const TensorPtr& logit, double target) {
    if (logit->size() != 1) {
        throw ShapeError("bce_with_logits: expected scalar logit, got " + shape_str(logit->shape));
    }
    const double z = logit->data[0];
    const double loss = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
    auto node = make_node({1}, {loss}, {logit});
    if (node->requires_grad) {
        node->backprop = [logit, target](Tensor& self) {
            logit->grad[0] += self.grad[0] * (detail::stable_sigmoid(logit->data[0]) - target);
        };
    }
    return node;
}

/// -log(probabilities[label]); probabilities must already sum to 1.
inline TensorPtr nll(const TensorPtr& probabilities, std::size_t label) {
    return neg(log(pick(probabilities, label)));
}

} // namespace evstock::nnkit
