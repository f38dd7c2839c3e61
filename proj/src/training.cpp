#include <algorithm>
#include "kgi/training.hpp"

#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "kgi/csv.hpp"
#include "kgi/parallel.hpp"
#include "kgi/random.hpp"

namespace kgi {

void TrainConfig::validate() const {
    if (!(margin > 0.0 && margin < 1.0)) throw ArgumentError("margin must lie in (0, 1)");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train_fraction must lie in (0, 1)");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw ArgumentError("Adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ArgumentError("adam_eps must be positive");
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw NumericError("cosine of a zero-norm vector");
    return a.dot(b) / (na * nb);
}

CosineLoss cosine_embedding_loss(const Eigen::VectorXd& a, const Eigen::VectorXd& b, PairLabel label, double margin) {
    if (a.size() != b.size()) throw ArgumentError("embeddings differ in dimension");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw NumericError("zero-norm embedding reached the loss (degenerate or empty graph)");
    }
    CosineLoss out;
    // Keep rounding overshoot out of [-1, 1].
    out.cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    // d cos / d a = b / (|a||b|) - cos a / |a|^2
    const auto dcos_da = [&] { return Eigen::VectorXd(b / (na * nb) - out.cosine * a / (na * na)); };
    const auto dcos_db = [&] { return Eigen::VectorXd(a / (na * nb) - out.cosine * b / (nb * nb)); };
    if (label == PairLabel::Positive) {
        out.loss = 1.0 - out.cosine;
        out.grad_a = -dcos_da();
        out.grad_b = -dcos_db();
    } else if (out.cosine > margin) {
        out.loss = out.cosine - margin;
        out.grad_a = dcos_da();
        out.grad_b = dcos_db();
    } else {
        out.loss = 0.0;
        out.grad_a = Eigen::VectorXd::Zero(a.size());
        out.grad_b = Eigen::VectorXd::Zero(b.size());
    }
    return out;
}

AdamState AdamState::zeros_like(const EncoderParameters& params) {
    return {EncoderParameters::zeros_like(params), EncoderParameters::zeros_like(params), 0};
}

void adam_step(EncoderWeights& weights, const EncoderGradients& grads, AdamState& state, std::uint64_t t,
               const TrainConfig& config) {
    if (t == 0) throw ArgumentError("Adam step index starts at 1");
    if (!weights.same_shape(grads) || !weights.same_shape(state.m) || !weights.same_shape(state.v)) {
        throw ArgumentError("Adam: parameter, gradient and state shapes differ");
    }
    grads.for_each([](std::string_view name, const auto& g) {
        if (!g.allFinite()) throw NumericError("non-finite gradient in tensor " + std::string(name));
    });
    adam_update(weights.w1, grads.w1, state.m.w1, state.v.w1, t, config);
    adam_update(weights.b1, grads.b1, state.m.b1, state.v.b1, t, config);
    adam_update(weights.w2, grads.w2, state.m.w2, state.v.w2, t, config);
    adam_update(weights.b2, grads.b2, state.m.b2, state.v.b2, t, config);
    adam_update(weights.w3, grads.w3, state.m.w3, state.v.w3, t, config);
    adam_update(weights.b3, grads.b3, state.m.b3, state.v.b3, t, config);
    state.step = t;
    ++weights.version;
}

bool EpochLoss::operator==(const EpochLoss& o) const {
    const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return epoch == o.epoch && same(train_loss, o.train_loss) && same(test_loss, o.test_loss);
}

GraphInput prepare_graph(const DocumentGraph& graph, EmbeddingProvider& provider) {
    GraphInput in;
    in.has_edges = !graph.is_empty();
    if (graph.nodes.empty()) return in;
    in.adjacency = normalize_adjacency(graph);
    in.features = featurize_graph(provider, graph);
    return in;
}

TrainingState initial_state(const EncoderConfig& encoder, const TrainConfig& train) {
    encoder.validate();
    train.validate();
    TrainingState s;
    s.encoder = encoder;
    s.train = train;
    s.weights = init_weights(encoder);
    s.optimizer = AdamState::zeros_like(s.weights);
    return s;
}

std::vector<PairSample> trainable_pairs(const GraphInputs& graphs, const std::vector<PairSample>& pairs,
                                        std::size_t* excluded) {
    std::vector<PairSample> out;
    std::size_t dropped = 0;
    for (const auto& p : pairs) {
        const auto a = graphs.find(p.doc_a);
        const auto b = graphs.find(p.doc_b);
        if (a == graphs.end() || b == graphs.end() || !a->second.has_edges || !b->second.has_edges) {
            ++dropped;
            continue;
        }
        out.push_back(p);
    }
    if (excluded) *excluded = dropped;
    return out;
}

Eigen::VectorXd embed_input(const EncoderWeights& weights, const GraphInput& input) {
    if (input.adjacency.rows() == 0) throw ArgumentError("cannot embed an empty graph");
    return forward(weights, input.adjacency, input.features).embedding;
}

Eigen::VectorXd embed_document(const EncoderWeights& weights, const DocumentGraph& graph, EmbeddingProvider& provider) {
    if (graph.nodes.empty()) throw ArgumentError("cannot embed empty graph '" + graph.doc_id + "'");
    return forward(weights, normalize_adjacency(graph), featurize_graph(provider, graph)).embedding;
}

namespace {

std::string pair_context(const PairSample& p) { return "pair (" + p.doc_a + ", " + p.doc_b + ")"; }

double mean_test_loss(const GraphInputs& graphs, const std::vector<PairSample>& pairs, const EncoderWeights& w,
                      const TrainConfig& config) {
    if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> losses(pairs.size());
    parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
        const auto& p = pairs[i];
        try {
            const auto ea = embed_input(w, graphs.find(p.doc_a)->second);
            const auto eb = embed_input(w, graphs.find(p.doc_b)->second);
            losses[i] = cosine_embedding_loss(ea, eb, p.label, config.margin).loss;
        } catch (const Error& e) {
            throw Error(pair_context(p) + ": " + e.what());
        }
    });
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(losses.size());
}

}  // namespace

TrainingState train(const GraphInputs& graphs, const PairSplit& pairs, TrainingState state, const CheckpointSink& sink) {
    const TrainConfig& config = state.train;
    config.validate();
    if (state.epochs_completed >= config.epochs) return state;

    std::size_t excluded_train = 0, excluded_test = 0;
    auto train_pairs = trainable_pairs(graphs, pairs.train, &excluded_train);
    const auto test_pairs = trainable_pairs(graphs, pairs.test, &excluded_test);
    if (excluded_train + excluded_test > 0) {
        spdlog::info("excluded {} train and {} test pairs touching empty or missing graphs", excluded_train,
                     excluded_test);
    }
    if (train_pairs.empty()) throw ArgumentError("no trainable pairs in the train set");

    while (state.epochs_completed < config.epochs) {
        const std::size_t epoch = state.epochs_completed + 1;
        rng::Engine engine(rng::derive(config.seed, 0x45504f4348ULL + epoch));
        std::vector<std::size_t> order(train_pairs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng::shuffle(order, engine);

        double total = 0.0;
        for (const std::size_t i : order) {
            const auto& p = train_pairs[i];
            try {
                const auto& ga = graphs.find(p.doc_a)->second;
                const auto& gb = graphs.find(p.doc_b)->second;
                const auto fa = forward(state.weights, ga.adjacency, ga.features);
                const auto fb = forward(state.weights, gb.adjacency, gb.features);
                const auto loss = cosine_embedding_loss(fa.embedding, fb.embedding, p.label, config.margin);
                total += loss.loss;
                auto grads = backward(state.weights, fa.cache, loss.grad_a);
                grads += backward(state.weights, fb.cache, loss.grad_b);
                adam_step(state.weights, grads, state.optimizer, state.optimizer.step + 1, config);
            } catch (const Error& e) {
                throw Error("epoch " + std::to_string(epoch) + ", " + pair_context(p) + ": " + e.what());
            }
        }
        EpochLoss record{epoch, total / static_cast<double>(train_pairs.size()),
                         mean_test_loss(graphs, test_pairs, state.weights, config)};
        spdlog::debug("epoch {}: train {:.6f} test {:.6f}", epoch, record.train_loss, record.test_loss);
        state.history.push_back(record);
        state.epochs_completed = epoch;

        const bool periodic = config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0;
        if (sink && (periodic || epoch == config.epochs)) sink(state);
    }
    return state;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<EpochLoss>& history) {
    std::vector<std::vector<std::string>> rows{{"epoch", "train_loss", "test_loss"}};
    for (const auto& h : history) {
        rows.push_back({std::to_string(h.epoch), csv::format_double(h.train_loss), csv::format_double(h.test_loss)});
    }
    csv::write_file(path, rows);
}

}  // namespace kgi
