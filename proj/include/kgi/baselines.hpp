#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kgi/features.hpp"

namespace kgi {

inline constexpr std::size_t kReuseHeadTrim = 300;
inline constexpr std::size_t kReuseTailTrim = 2000;
inline constexpr std::size_t kDefaultMinNgram = 5;
inline constexpr std::size_t kDocEmbeddingChunk = 1000;

// Drops the first 300 and last 2000 code points (titles, reference lists).
std::string trim_for_reuse(std::string_view text);

// A maximal run of identical words: a[a_word, a_word+length) == b[b_word, ...).
struct WordRun {
    std::size_t a_word = 0;
    std::size_t b_word = 0;
    std::size_t length = 0;

    bool operator==(const WordRun&) const = default;
    auto operator<=>(const WordRun&) const = default;
};

// Every shared run of at least min_ngram words that cannot be extended in
// either direction, sorted.
std::vector<WordRun> maximal_shared_runs(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                         std::size_t min_ngram);

// Groups runs whose word intervals overlap in both documents at once
// (transitively). Each group is returned as indices into `runs`, ordered by
// their smallest index.
std::vector<std::vector<std::size_t>> merge_runs(const std::vector<WordRun>& runs);

struct ReuseMatch {
    std::pair<std::size_t, std::size_t> span_a;  // code points, [begin, end)
    std::pair<std::size_t, std::size_t> span_b;
    std::size_t length = 0;                      // words covered, the larger of the two sides

    bool operator==(const ReuseMatch&) const = default;
};

struct ReuseResult {
    std::size_t score = 0;  // merged segments
    std::vector<ReuseMatch> matches;
};

// Operates on already trimmed texts.
ReuseResult text_reuse_score(std::string_view a, std::string_view b, std::size_t min_ngram = kDefaultMinNgram);

enum class KlDirection { Symmetric, Forward, Reverse };

std::string to_string(KlDirection d);
KlDirection parse_kl_direction(std::string_view s);

// Natural-log KL divergence. Symmetric returns KL(p||q) + KL(q||p); Forward
// is KL(p||q), Reverse KL(q||p). Entries must be strictly positive.
double kl_score(const Eigen::VectorXd& p, const Eigen::VectorXd& q, KlDirection direction = KlDirection::Symmetric);

// Sum of the embeddings of consecutive non-overlapping 1000 code point chunks.
Eigen::VectorXd document_embedding(EmbeddingProvider& provider, std::string_view text,
                                   std::size_t chunk_size = kDocEmbeddingChunk);

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// 1 - cos(document_embedding(a), document_embedding(b)).
double doc_embedding_score(EmbeddingProvider& provider, std::string_view a, std::string_view b,
                           std::size_t chunk_size = kDocEmbeddingChunk);

}  // namespace kgi
