#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kgi/encoder.hpp"
#include "kgi/errors.hpp"
#include "kgi/features.hpp"
#include "kgi/kgx.hpp"
#include "kgi/pairs.hpp"

namespace kgi {

struct TrainConfig {
    double margin = 0.5;
    double learning_rate = 0.05;
    std::size_t epochs = 80;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t checkpoint_every = 10;  // 0: only at the end
    std::size_t jobs = 1;               // test-loss evaluation threads

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct CosineLoss {
    double loss = 0.0;
    double cosine = 0.0;
    Eigen::VectorXd grad_a;
    Eigen::VectorXd grad_b;
};

// positive: 1 - cos;  negative: max(0, cos - margin), zero gradient when
// clamped. Zero-norm inputs throw NumericError.
CosineLoss cosine_embedding_loss(const Eigen::VectorXd& a, const Eigen::VectorXd& b, PairLabel label, double margin);

struct AdamState {
    EncoderParameters m;
    EncoderParameters v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const EncoderParameters& params);
    bool operator==(const AdamState&) const = default;
};

// One Adam update of a single tensor at step t >= 1.
template <typename Tensor>
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t t, const TrainConfig& c) {
    const double b1 = c.adam_beta1;
    const double b2 = c.adam_beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= c.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.adam_eps);
}

// Applies Adam to every tensor at step t. Non-finite gradients abort before
// any tensor changes, naming the offending tensor.
void adam_step(EncoderWeights& weights, const EncoderGradients& grads, AdamState& state, std::uint64_t t,
               const TrainConfig& config);

// Encoder input for one document.
struct GraphInput {
    Eigen::MatrixXd adjacency;
    Eigen::MatrixXd features;
    bool has_edges = false;
};

using GraphInputs = std::map<std::string, GraphInput, std::less<>>;

GraphInput prepare_graph(const DocumentGraph& graph, EmbeddingProvider& provider);

struct EpochLoss {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double test_loss = 0.0;  // NaN without test pairs

    bool operator==(const EpochLoss& o) const;
};

// Everything needed to continue training bit-for-bit.
struct TrainingState {
    EncoderConfig encoder;
    TrainConfig train;
    EncoderWeights weights;
    AdamState optimizer;
    std::size_t epochs_completed = 0;
    std::vector<EpochLoss> history;
};

TrainingState initial_state(const EncoderConfig& encoder, const TrainConfig& train);

// Pairs whose graphs are missing or have no edges are dropped; the count of
// dropped pairs is written to `excluded`.
std::vector<PairSample> trainable_pairs(const GraphInputs& graphs, const std::vector<PairSample>& pairs,
                                        std::size_t* excluded = nullptr);

using CheckpointSink = std::function<void(const TrainingState&)>;

// Continues `state` until state.train.epochs epochs are complete: per epoch,
// a seed-derived shuffle of the train pairs, one Adam step per pair, then a
// no-update pass over the test pairs. `sink` is called every
// checkpoint_every epochs and after the last one.
TrainingState train(const GraphInputs& graphs, const PairSplit& pairs, TrainingState state,
                    const CheckpointSink& sink = {});

Eigen::VectorXd embed_input(const EncoderWeights& weights, const GraphInput& input);

// normalize_adjacency -> featurize_graph -> forward.
Eigen::VectorXd embed_document(const EncoderWeights& weights, const DocumentGraph& graph,
                               EmbeddingProvider& provider);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// loss.csv: epoch,train_loss,test_loss
void write_loss_csv(const std::filesystem::path& path, const std::vector<EpochLoss>& history);

}  // namespace kgi
