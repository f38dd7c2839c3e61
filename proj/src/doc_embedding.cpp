#include <algorithm>
#include <cmath>

#include "kgi/baselines.hpp"
#include "kgi/errors.hpp"
#include "kgi/text.hpp"

namespace kgi {

std::string to_string(KlDirection d) {
    switch (d) {
        case KlDirection::Symmetric: return "symmetric";
        case KlDirection::Forward: return "forward";
        case KlDirection::Reverse: return "reverse";
    }
    return "symmetric";
}

KlDirection parse_kl_direction(std::string_view s) {
    if (s == "symmetric") return KlDirection::Symmetric;
    if (s == "forward") return KlDirection::Forward;
    if (s == "reverse") return KlDirection::Reverse;
    throw ArgumentError("unknown KL direction '" + std::string(s) + "'");
}

namespace {

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) sum += p[k] * std::log(p[k] / q[k]);
    return std::max(sum, 0.0);
}

}  // namespace

double kl_score(const Eigen::VectorXd& p, const Eigen::VectorXd& q, KlDirection direction) {
    if (p.size() != q.size() || p.size() == 0) throw ArgumentError("KL inputs must be non-empty and the same length");
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (!(p[k] > 0.0) || !(q[k] > 0.0) || !std::isfinite(p[k]) || !std::isfinite(q[k]))
            throw NumericError("KL inputs must be strictly positive (entry " + std::to_string(k) + ")");
    }
    switch (direction) {
        case KlDirection::Forward: return kl(p, q);
        case KlDirection::Reverse: return kl(q, p);
        case KlDirection::Symmetric: break;
    }
    return kl(p, q) + kl(q, p);
}

Eigen::VectorXd document_embedding(EmbeddingProvider& provider, std::string_view text, std::size_t chunk_size) {
    if (chunk_size == 0) throw ArgumentError("chunk size must be positive");
    const auto offsets = text::codepoint_offsets(text);
    const std::size_t n = offsets.size() - 1;
    std::vector<std::string> chunks;
    for (std::size_t start = 0; start < n; start += chunk_size) {
        auto chunk = text::slice_codepoints(text, offsets, start, std::min(n, start + chunk_size));
        if (!text::trim(chunk).empty()) chunks.push_back(std::move(chunk));
    }
    if (chunks.empty()) throw ArgumentError("document embedding needs non-empty text");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(provider.dimension()));
    for (const auto& v : provider.embed_batch(chunks)) sum += v;
    return sum;
}

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw NumericError("cosine distance of a zero-norm vector");
    if (a == b) return 0.0;
    const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return 1.0 - c;
}

double doc_embedding_score(EmbeddingProvider& provider, std::string_view a, std::string_view b,
                           std::size_t chunk_size) {
    return cosine_distance(document_embedding(provider, a, chunk_size), document_embedding(provider, b, chunk_size));
}

}  // namespace kgi
