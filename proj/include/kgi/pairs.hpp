#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgi/corpus.hpp"

namespace kgi {

enum class PairLabel { Negative = 0, Positive = 1 };

std::string to_string(PairLabel label);
PairLabel parse_label(std::string_view s);

// Unordered same-subject pair, stored with doc_a < doc_b.
struct PairSample {
    std::string doc_a;
    std::string doc_b;
    PairLabel label = PairLabel::Negative;
    std::string subject;

    bool operator==(const PairSample&) const = default;
};

PairSample make_pair_sample(std::string a, std::string b, PairLabel label, std::string subject);
std::string pair_id(const PairSample& p);

// 13,500 negatives for 8,500 positives.
inline constexpr double kNegativesPerPositive = 13500.0 / 8500.0;
std::size_t default_negative_count(std::size_t positives);

struct PairSampling {
    std::vector<PairSample> pairs;  // positives first, then negatives
    std::size_t positive_shortfall = 0;
    std::size_t negative_shortfall = 0;
};

// Draws uniformly without replacement from the same-subject pairs with a
// citation (positives) and without one (negatives). A stratum smaller than
// requested is returned whole and the shortfall recorded.
PairSampling sample_pairs(const Corpus& corpus, std::int64_t n_positive, std::int64_t n_negative,
                          std::uint64_t seed);

struct PairSplit {
    std::vector<PairSample> train;
    std::vector<PairSample> test;
};

// Label-stratified split. round(fraction * N) pairs go to train, divided
// between the strata by largest remainder, so each stratum is within one
// pair of its exact share.
PairSplit split_pairs(const std::vector<PairSample>& pairs, double train_fraction, std::uint64_t seed);

// pairs.csv: doc_a,doc_b,label,subject with label "positive"/"negative".
void write_pairs_csv(const std::filesystem::path& path, const std::vector<PairSample>& pairs);
std::vector<PairSample> read_pairs_csv(const std::filesystem::path& path);

}  // namespace kgi
