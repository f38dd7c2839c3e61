#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kgi/kgx.hpp"

namespace kgi {

struct EncoderConfig {
    std::size_t in_dim = 384;
    std::size_t hidden_dim = 500;
    std::size_t out_dim = 100;
    std::uint64_t seed = 0;
    // Recorded for provenance; neither is applied.
    double dropout = 0.0;
    double weight_decay = 0.0;

    void validate() const;
    bool operator==(const EncoderConfig&) const = default;
};

// The six tensors of the three-layer encoder. Also used for gradients and
// Adam moments, which share the shapes.
struct EncoderParameters {
    Eigen::MatrixXd w1;  // in x hidden
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // hidden x hidden
    Eigen::VectorXd b2;
    Eigen::MatrixXd w3;  // hidden x out
    Eigen::VectorXd b3;

    static EncoderParameters zeros(const EncoderConfig& config);
    static EncoderParameters zeros_like(const EncoderParameters& other);

    std::size_t in_dim() const { return static_cast<std::size_t>(w1.rows()); }
    std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(w3.cols()); }

    template <typename Fn>
    void for_each(Fn&& fn) {
        fn(std::string_view("W1"), w1);
        fn(std::string_view("b1"), b1);
        fn(std::string_view("W2"), w2);
        fn(std::string_view("b2"), b2);
        fn(std::string_view("W3"), w3);
        fn(std::string_view("b3"), b3);
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        fn(std::string_view("W1"), w1);
        fn(std::string_view("b1"), b1);
        fn(std::string_view("W2"), w2);
        fn(std::string_view("b2"), b2);
        fn(std::string_view("W3"), w3);
        fn(std::string_view("b3"), b3);
    }

    EncoderParameters& operator+=(const EncoderParameters& other);
    bool same_shape(const EncoderParameters& other) const;
    // Exact element-wise equality.
    bool operator==(const EncoderParameters& other) const;
};

using EncoderGradients = EncoderParameters;

struct EncoderWeights : EncoderParameters {
    // Bumped by every optimizer update so stale forward caches are caught.
    // Not part of equality.
    std::uint64_t version = 0;
};

// Glorot-uniform matrices in +-sqrt(6 / (fan_in + fan_out)), zero biases,
// drawn W1, W2, W3 in row-major order from a single seeded stream.
EncoderWeights init_weights(const EncoderConfig& config);

// D^-1/2 (A + I) D^-1/2 with A the 0/1 undirected adjacency.
Eigen::MatrixXd normalize_adjacency(std::size_t node_count,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& edges);
Eigen::MatrixXd normalize_adjacency(const DocumentGraph& graph);

struct ForwardCache {
    Eigen::MatrixXd adjacency;  // n x n
    Eigen::MatrixXd ax;         // A X
    Eigen::MatrixXd z1;         // A X W1 + b1
    Eigen::MatrixXd ah1;        // A relu(z1)
    Eigen::MatrixXd z2;         // A H1 W2 + b2
    Eigen::MatrixXd ah2;        // A relu(z2)
    std::uint64_t weights_version = 0;
};

struct ForwardResult {
    Eigen::VectorXd embedding;  // out_dim
    ForwardCache cache;
};

// H1 = relu(A X W1 + b1), H2 = relu(A H1 W2 + b2), H3 = A H2 W3 + b3,
// embedding = mean over the rows of H3.
ForwardResult forward(const EncoderWeights& weights, const Eigen::MatrixXd& adjacency,
                      const Eigen::MatrixXd& features);

// Gradients of upstream . embedding with respect to every parameter.
// relu'(0) is taken as 0. The cache must come from forward() with these
// weights at their current version.
EncoderGradients backward(const EncoderWeights& weights, const ForwardCache& cache,
                          const Eigen::VectorXd& upstream);

}  // namespace kgi
