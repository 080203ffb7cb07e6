#pragma once
#include <algorithm>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "evstock/common/date.hpp"
#include "evstock/common/errors.hpp"
#include "evstock/common/rng.hpp"
#include "evstock/common/text.hpp"
#include "evstock/embeddings/embed.hpp"
#include "evstock/nnkit/adam.hpp"
#include "evstock/nnkit/ops.hpp"
#include "evstock/nnkit/tensor.hpp"

namespace evstock::ntn {

using embeddings::EmbeddedTuple;
using embeddings::Vocabulary;
using embeddings::WordEmbeddings;
using nnkit::TensorPtr;

/// Fused event vector for one headline.
struct EventEmbedding {
    std::vector<double> u;
    Date date;
};

/// Bilinear tensors for the three compositions plus a shared linear map,
/// shared bias, and the global scoring vector.
struct NtnParams {
    std::size_t dim = 0;
    TensorPtr t1, t2, t3; // [d, d, d]
    TensorPtr w;          // [d, 2d]
    TensorPtr b;          // [d]
    TensorPtr m;          // [d]

    static NtnParams init(std::size_t dim, Rng& rng) {
        NtnParams p;
        p.dim = dim;
        auto make_t = [&](const char* name) {
            return nnkit::glorot_uniform({dim, dim, dim}, dim, dim, rng, name);
        };
        p.t1 = make_t("ntn.t1");
        p.t2 = make_t("ntn.t2");
        p.t3 = make_t("ntn.t3");
        p.w = nnkit::glorot_uniform({dim, 2 * dim}, 2 * dim, dim, rng, "ntn.w");
        p.b = nnkit::zeros({dim}, true, "ntn.b");
        p.m = nnkit::glorot_uniform({dim}, dim, 1, rng, "ntn.m");
        return p;
    }

    std::vector<TensorPtr> parameters() const { return {t1, t2, t3, w, b, m}; }

    /// Every parameter the l2 penalty covers (M is excluded).
    std::vector<TensorPtr> regularized() const { return {t1, t2, t3, w, b}; }
};

namespace detail {

inline TensorPtr compose(const TensorPtr& tensor3, const TensorPtr& left, const TensorPtr& right,
                         const NtnParams& params) {
    auto bilinear_part = nnkit::bilinear(tensor3, left, right);
    auto linear_part = nnkit::matvec(params.w, nnkit::concat({left, right}));
    return nnkit::tanh(nnkit::add(nnkit::add(bilinear_part, linear_part), params.b));
}

} // namespace detail

/// Tape-level forward pass: R1 from (O1, P), R2 from (P, O2), U from
/// (R1, R2). Each stage is tanh(aT T_i b + W[a;b] + b).
inline TensorPtr ntn_forward_t(const TensorPtr& actor, const TensorPtr& action,
                               const TensorPtr& object, const NtnParams& params) {
    const nnkit::Shape expected{params.dim};
    if (actor->shape != expected || action->shape != expected || object->shape != expected) {
        throw ShapeError("ntn_forward: slot shapes " + nnkit::shape_str(actor->shape) + "/" +
                         nnkit::shape_str(action->shape) + "/" +
                         nnkit::shape_str(object->shape) + ", expected [" +
                         std::to_string(params.dim) + "]");
    }
    auto r1 = detail::compose(params.t1, actor, action, params);
    auto r2 = detail::compose(params.t2, action, object, params);
    return detail::compose(params.t3, r1, r2, params);
}

inline EventEmbedding ntn_forward(const EmbeddedTuple& tuple, const NtnParams& params) {
    auto u = ntn_forward_t(nnkit::make_tensor({params.dim}, tuple.actor),
                           nnkit::make_tensor({params.dim}, tuple.action),
                           nnkit::make_tensor({params.dim}, tuple.object), params);
    return EventEmbedding{u->data, tuple.date};
}

inline double score(const EventEmbedding& event, const NtnParams& params) {
    if (event.u.size() != params.dim) {
        throw ShapeError("score: event length " + std::to_string(event.u.size()) +
                         ", expected " + std::to_string(params.dim));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < params.dim; ++i) acc += params.m->data[i] * event.u[i];
    return acc;
}

/// Training negative: the actor slot is replaced by a uniformly sampled
/// vocabulary word's embedding; action, object, and date pass through.
inline EmbeddedTuple corrupt(const EmbeddedTuple& tuple, const WordEmbeddings& embeddings,
                             const Vocabulary& vocab, Rng& rng) {
    if (vocab.size() == 0) throw DataError("corrupt: empty vocabulary");
    EmbeddedTuple corrupted = tuple;
    const std::size_t pickd = static_cast<std::size_t>(rng.uniform_int(vocab.size()));
    auto row = embeddings.row(pickd);
    corrupted.actor.assign(row.begin(), row.end());
    return corrupted;
}

/// max(0, 1 - score(true) + score(corrupt))
inline double margin_loss(double score_true, double score_corrupt) {
    return std::max(0.0, 1.0 - score_true + score_corrupt);
}

/// Margin term plus lambda * ||(T1,T2,T3,W,b)||^2 given precomputed scores
/// and squared parameter norm.
inline double ntn_loss_value(double score_true, double score_corrupt, double param_sq_norm,
                             double lambda = 0.0001) {
    return margin_loss(score_true, score_corrupt) + lambda * param_sq_norm;
}

inline double sq_norm(std::span<const TensorPtr> arrays) {
    double acc = 0.0;
    for (const auto& a : arrays) {
        for (double v : a->data) acc += v * v;
    }
    return acc;
}

/// Margin ranking term plus lambda * ||(T1,T2,T3,W,b)||^2 on the tape.
inline TensorPtr ntn_loss_t(const TensorPtr& true_actor, const TensorPtr& true_action,
                            const TensorPtr& true_object, const TensorPtr& corrupt_actor,
                            const NtnParams& params, double lambda) {
    auto u_true = ntn_forward_t(true_actor, true_action, true_object, params);
    auto u_corrupt = ntn_forward_t(corrupt_actor, true_action, true_object, params);
    auto margin = nnkit::relu(nnkit::affine(
        nnkit::sub(nnkit::dot(params.m, u_corrupt), nnkit::dot(params.m, u_true)), 1.0, 1.0));
    TensorPtr penalty = nnkit::scalar(0.0);
    for (const auto& p : params.regularized()) {
        penalty = nnkit::add(penalty, nnkit::sum_squares(p));
    }
    return nnkit::add(margin, nnkit::scale(penalty, lambda));
}

inline double ntn_loss(const EmbeddedTuple& tuple, const EmbeddedTuple& corrupted,
                       const NtnParams& params, double lambda = 0.0001) {
    auto loss = ntn_loss_t(nnkit::make_tensor({params.dim}, tuple.actor),
                           nnkit::make_tensor({params.dim}, tuple.action),
                           nnkit::make_tensor({params.dim}, tuple.object),
                           nnkit::make_tensor({params.dim}, corrupted.actor), params, lambda);
    return loss->data[0];
}

struct TrainNtnConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 50;
    double learning_rate = 0.001;
    double lambda = 0.0001;
    std::uint64_t seed = 0;
};

struct TrainNtnResult {
    NtnParams params;
    std::vector<double> loss_curve; // mean loss per epoch
};

/// Mini-batch Adam over margin+l2 loss with one fresh corruption per sample
/// per epoch. Word embeddings stay frozen; visit order is the input order.
inline TrainNtnResult train_ntn(std::span<const EmbeddedTuple> tuples,
                                const WordEmbeddings& embeddings, const Vocabulary& vocab,
                                const TrainNtnConfig& config) {
    if (tuples.empty()) throw DataError("train_ntn: no tuples");
    const std::size_t dim = tuples[0].actor.size();
    Rng init_rng = Rng(config.seed).derive("ntn-init");
    Rng corrupt_rng = Rng(config.seed).derive("ntn-corrupt");

    TrainNtnResult result;
    result.params = NtnParams::init(dim, init_rng);
    auto params = result.params.parameters();
    auto adam = nnkit::AdamState::create(params, config.learning_rate);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < tuples.size(); start += config.batch_size) {
            const std::size_t stop = std::min(tuples.size(), start + config.batch_size);
            nnkit::zero_grad(params);
            for (std::size_t i = start; i < stop; ++i) {
                auto corrupted = corrupt(tuples[i], embeddings, vocab, corrupt_rng);
                auto loss = ntn_loss_t(
                    nnkit::make_tensor({dim}, tuples[i].actor),
                    nnkit::make_tensor({dim}, tuples[i].action),
                    nnkit::make_tensor({dim}, tuples[i].object),
                    nnkit::make_tensor({dim}, corrupted.actor), result.params, config.lambda);
                if (!std::isfinite(loss->data[0])) {
                    throw NumericError("train_ntn: non-finite loss at epoch " +
                                       std::to_string(epoch));
                }
                epoch_loss += loss->data[0];
                nnkit::backward(loss);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (const auto& p : params) {
                for (double& g : p->grad) g *= inv;
            }
            nnkit::adam_step(params, adam);
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(tuples.size()));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint format shared by every model in the repo: one text header line
//   evstockckpt v1 <kind> dim=<d> lambda=<l> seed=<s>
// followed by raw little-endian 64-bit parameter arrays in declared order.
// ---------------------------------------------------------------------------

inline void write_checkpoint(const std::filesystem::path& path, const std::string& kind,
                             std::size_t dim, double lambda, std::uint64_t seed,
                             std::span<const TensorPtr> arrays) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out << "evstockckpt v1 " << kind << " dim=" << dim << " lambda=" << format_double(lambda)
        << " seed=" << seed << "\n";
    for (const auto& a : arrays) {
        out.write(reinterpret_cast<const char*>(a->data.data()),
                  static_cast<std::streamsize>(a->data.size() * sizeof(double)));
    }
    if (!out) throw DataError("checkpoint write failed: " + path.string());
}

struct CheckpointHeader {
    std::string kind;
    std::size_t dim = 0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
};

inline CheckpointHeader read_checkpoint(const std::filesystem::path& path,
                                        std::span<const TensorPtr> arrays) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    std::string header;
    std::getline(in, header);
    auto fields = split(header, ' ');
    if (fields.size() != 6 || fields[0] != "evstockckpt" || fields[1] != "v1") {
        throw DataError(path.string() + ": unrecognized checkpoint header '" + header + "'");
    }
    auto value_of = [&](std::string_view field, std::string_view key) {
        if (!field.starts_with(key)) {
            throw DataError(path.string() + ": expected " + std::string(key) +
                            " in checkpoint header");
        }
        return field.substr(key.size());
    };
    CheckpointHeader meta;
    meta.kind = std::string(fields[2]);
    meta.dim = static_cast<std::size_t>(parse_long(value_of(fields[3], "dim="), "dim"));
    meta.lambda = parse_double(value_of(fields[4], "lambda="), "lambda");
    meta.seed = static_cast<std::uint64_t>(parse_long(value_of(fields[5], "seed="), "seed"));
    for (const auto& a : arrays) {
        in.read(reinterpret_cast<char*>(a->data.data()),
                static_cast<std::streamsize>(a->data.size() * sizeof(double)));
        if (!in) throw DataError(path.string() + ": checkpoint truncated");
    }
    return meta;
}

inline void save_ntn(const std::filesystem::path& path, const NtnParams& params, double lambda,
                     std::uint64_t seed) {
    auto arrays = params.parameters();
    write_checkpoint(path, "ntn", params.dim, lambda, seed, arrays);
}

inline NtnParams load_ntn(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("cannot open checkpoint: " + path.string());
    std::string header;
    std::getline(probe, header);
    auto fields = split(header, ' ');
    if (fields.size() != 6 || fields[2] != "ntn") {
        throw DataError(path.string() + ": not an ntn checkpoint");
    }
    const std::size_t dim =
        static_cast<std::size_t>(parse_long(split(fields[3], '=')[1], "dim"));
    probe.close();

    Rng dummy(0);
    NtnParams params = NtnParams::init(dim, dummy);
    auto arrays = params.parameters();
    read_checkpoint(path, arrays);
    return params;
}

} // namespace evstock::ntn
