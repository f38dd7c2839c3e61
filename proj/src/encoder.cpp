#include "kgi/encoder.hpp"

#include <cmath>

#include "kgi/errors.hpp"
#include "kgi/random.hpp"

namespace kgi {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& z) {
    return (z.array() > 0.0).cast<double>().matrix();
}

}  // namespace

void EncoderConfig::validate() const {
    if (in_dim == 0 || hidden_dim == 0 || out_dim == 0) throw ArgumentError("encoder dimensions must be at least 1");
    if (dropout != 0.0 || weight_decay != 0.0) {
        throw ArgumentError("dropout and weight decay are not supported; leave them at 0");
    }
}

EncoderParameters EncoderParameters::zeros(const EncoderConfig& c) {
    EncoderParameters p;
    p.w1 = Eigen::MatrixXd::Zero(idx(c.in_dim), idx(c.hidden_dim));
    p.b1 = Eigen::VectorXd::Zero(idx(c.hidden_dim));
    p.w2 = Eigen::MatrixXd::Zero(idx(c.hidden_dim), idx(c.hidden_dim));
    p.b2 = Eigen::VectorXd::Zero(idx(c.hidden_dim));
    p.w3 = Eigen::MatrixXd::Zero(idx(c.hidden_dim), idx(c.out_dim));
    p.b3 = Eigen::VectorXd::Zero(idx(c.out_dim));
    return p;
}

EncoderParameters EncoderParameters::zeros_like(const EncoderParameters& o) {
    EncoderParameters p;
    p.w1 = Eigen::MatrixXd::Zero(o.w1.rows(), o.w1.cols());
    p.b1 = Eigen::VectorXd::Zero(o.b1.size());
    p.w2 = Eigen::MatrixXd::Zero(o.w2.rows(), o.w2.cols());
    p.b2 = Eigen::VectorXd::Zero(o.b2.size());
    p.w3 = Eigen::MatrixXd::Zero(o.w3.rows(), o.w3.cols());
    p.b3 = Eigen::VectorXd::Zero(o.b3.size());
    return p;
}

EncoderParameters& EncoderParameters::operator+=(const EncoderParameters& o) {
    if (!same_shape(o)) throw ArgumentError("parameter shapes differ");
    w1 += o.w1;
    b1 += o.b1;
    w2 += o.w2;
    b2 += o.b2;
    w3 += o.w3;
    b3 += o.b3;
    return *this;
}

bool EncoderParameters::same_shape(const EncoderParameters& o) const {
    return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
           w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size() &&
           w3.rows() == o.w3.rows() && w3.cols() == o.w3.cols() && b3.size() == o.b3.size();
}

bool EncoderParameters::operator==(const EncoderParameters& o) const {
    return same_shape(o) && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 && w3 == o.w3 && b3 == o.b3;
}

EncoderWeights init_weights(const EncoderConfig& config) {
    config.validate();
    EncoderWeights w;
    static_cast<EncoderParameters&>(w) = EncoderParameters::zeros(config);
    rng::Engine engine(config.seed);
    const auto glorot = [&](Eigen::MatrixXd& m) {
        const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng::uniform(engine, -bound, bound);
        }
    };
    glorot(w.w1);
    glorot(w.w2);
    glorot(w.w3);
    return w;
}

Eigen::MatrixXd normalize_adjacency(std::size_t node_count,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    if (node_count == 0) throw ArgumentError("cannot normalize the adjacency of an empty graph");
    const Eigen::Index n = idx(node_count);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (const auto& [u, v] : edges) {
        if (u >= node_count || v >= node_count) throw ArgumentError("edge references a node outside the graph");
        if (u == v) continue;
        a(idx(u), idx(v)) = 1.0;
        a(idx(v), idx(u)) = 1.0;
    }
    const Eigen::VectorXd inv_sqrt_degree = a.rowwise().sum().cwiseSqrt().cwiseInverse();
    return inv_sqrt_degree.asDiagonal() * a * inv_sqrt_degree.asDiagonal();
}

Eigen::MatrixXd normalize_adjacency(const DocumentGraph& graph) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(graph.edges.size());
    for (const auto& e : graph.edges) edges.emplace_back(e.source, e.target);
    return normalize_adjacency(graph.nodes.size(), edges);
}

ForwardResult forward(const EncoderWeights& w, const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& features) {
    const Eigen::Index n = adjacency.rows();
    if (n == 0 || adjacency.cols() != n) throw ArgumentError("adjacency must be square and non-empty");
    if (features.rows() != n) throw ArgumentError("feature rows do not match the node count");
    if (features.cols() != w.w1.rows()) {
        throw ArgumentError("feature dimension " + std::to_string(features.cols()) + " does not match encoder input " +
                            std::to_string(w.w1.rows()));
    }
    ForwardResult r;
    ForwardCache& c = r.cache;
    c.adjacency = adjacency;
    c.ax = adjacency * features;
    c.z1 = (c.ax * w.w1).rowwise() + w.b1.transpose();
    c.ah1 = adjacency * relu(c.z1);
    c.z2 = (c.ah1 * w.w2).rowwise() + w.b2.transpose();
    c.ah2 = adjacency * relu(c.z2);
    const Eigen::MatrixXd h3 = (c.ah2 * w.w3).rowwise() + w.b3.transpose();
    r.embedding = h3.colwise().mean().transpose();
    c.weights_version = w.version;
    return r;
}

EncoderGradients backward(const EncoderWeights& w, const ForwardCache& c, const Eigen::VectorXd& upstream) {
    if (c.weights_version != w.version) throw ArgumentError("stale forward cache: weights changed since forward()");
    const Eigen::Index n = c.adjacency.rows();
    if (n == 0 || c.ah2.cols() != w.w3.rows() || c.ax.cols() != w.w1.rows() || c.z1.cols() != w.w1.cols()) {
        throw ArgumentError("forward cache does not match these weights");
    }
    if (upstream.size() != w.w3.cols()) throw ArgumentError("upstream gradient has the wrong dimension");

    EncoderGradients g;
    // mean pooling: every row of H3 receives upstream / n
    const Eigen::MatrixXd d_h3 = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)) * upstream.transpose();
    g.w3 = c.ah2.transpose() * d_h3;
    g.b3 = d_h3.colwise().sum().transpose();

    const Eigen::MatrixXd d_z2 = (c.adjacency.transpose() * (d_h3 * w.w3.transpose())).cwiseProduct(relu_mask(c.z2));
    g.w2 = c.ah1.transpose() * d_z2;
    g.b2 = d_z2.colwise().sum().transpose();

    const Eigen::MatrixXd d_z1 = (c.adjacency.transpose() * (d_z2 * w.w2.transpose())).cwiseProduct(relu_mask(c.z1));
    g.w1 = c.ax.transpose() * d_z1;
    g.b1 = d_z1.colwise().sum().transpose();
    return g;
}

}  // namespace kgi
