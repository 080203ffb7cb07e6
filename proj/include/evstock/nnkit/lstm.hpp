#pragma once

#include <cstddef>
#include <vector>

#include "evstock/nnkit/ops.hpp"
#include "evstock/nnkit/tensor.hpp"

namespace evstock::nnkit {

/// Standard gate formulation: input, forget, output gates (sigmoid) and a
/// tanh candidate, each as a [hidden, input+hidden] map over [x; h_prev].
struct LstmParams {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    TensorPtr w_input, w_forget, w_output, w_cell; // [hidden, input+hidden]
    TensorPtr b_input, b_forget, b_output, b_cell; // [hidden]

    static LstmParams init(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
        LstmParams p;
        p.input_size = input_size;
        p.hidden_size = hidden_size;
        const std::size_t in = input_size + hidden_size;
        auto make_w = [&](const char* name) {
            return glorot_uniform({hidden_size, in}, in, hidden_size, rng, name);
        };
        p.w_input = make_w("lstm.w_input");
        p.w_forget = make_w("lstm.w_forget");
        p.w_output = make_w("lstm.w_output");
        p.w_cell = make_w("lstm.w_cell");
        p.b_input = zeros({hidden_size}, true, "lstm.b_input");
        p.b_forget = zeros({hidden_size}, true, "lstm.b_forget");
        p.b_output = zeros({hidden_size}, true, "lstm.b_output");
        p.b_cell = zeros({hidden_size}, true, "lstm.b_cell");
        return p;
    }

    std::vector<TensorPtr> parameters() const {
        return {w_input, w_forget, w_output, w_cell, b_input, b_forget, b_output, b_cell};
    }
};

struct LstmState {
    TensorPtr h;
    TensorPtr c;
};

inline LstmState lstm_initial_state(std::size_t hidden_size) {
    return {zeros({hidden_size}), zeros({hidden_size})};
}

inline LstmState lstm_step(const TensorPtr& x, const LstmState& prev, const LstmParams& params) {
    if (x->shape != Shape{params.input_size}) {
        throw ShapeError("lstm_step: input shape " + shape_str(x->shape) + ", expected [" +
                         std::to_string(params.input_size) + "]");
    }
    if (prev.h->shape != Shape{params.hidden_size} || prev.c->shape != Shape{params.hidden_size}) {
        throw ShapeError("lstm_step: state shape " + shape_str(prev.h->shape) + ", expected [" +
                         std::to_string(params.hidden_size) + "]");
    }
    auto z = concat({x, prev.h});
    auto gate_i = sigmoid(add(matvec(params.w_input, z), params.b_input));
    auto gate_f = sigmoid(add(matvec(params.w_forget, z), params.b_forget));
    auto gate_o = sigmoid(add(matvec(params.w_output, z), params.b_output));
    auto candidate = tanh(add(matvec(params.w_cell, z), params.b_cell));
    auto c = add(mul(gate_f, prev.c), mul(gate_i, candidate));
    auto h = mul(gate_o, tanh(c));
    return {h, c};
}

/// Runs the cell over a sequence and returns the final state.
inline LstmState lstm_run(const std::vector<TensorPtr>& sequence, const LstmParams& params) {
    if (sequence.empty()) throw ShapeError("lstm_run: empty sequence");
    LstmState state = lstm_initial_state(params.hidden_size);
    for (const auto& x : sequence) state = lstm_step(x, state, params);
    return state;
}

} // namespace evstock::nnkit
