#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kgi {

struct LdaConfig {
    std::size_t topics = 500;
    double alpha = 0.1;
    double beta = 0.01;
    std::size_t train_sweeps = 200;
    std::size_t infer_sweeps = 50;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const LdaConfig&) const = default;
};

// Lowercased words with stopwords, digits-only tokens and single characters
// removed.
std::vector<std::string> lda_tokens(std::string_view text);

// Collapsed Gibbs LDA. Training is single-threaded; inference is a pure
// function of (model, text) and may run concurrently.
class LdaModel {
public:
    static LdaModel fit(const std::vector<std::string>& texts, const LdaConfig& config);

    // Folds in one document against the fixed topic-word counts. Entries are
    // strictly positive and sum to one. A document with no known words gets
    // the uniform distribution.
    Eigen::VectorXd infer(std::string_view text) const;

    const LdaConfig& config() const { return config_; }
    const std::vector<std::string>& vocabulary() const { return vocab_; }
    std::size_t topic_word(std::size_t topic, std::size_t word) const { return counts_[word * config_.topics + topic]; }
    std::size_t topic_total(std::size_t topic) const { return totals_[topic]; }

    void save(const std::filesystem::path& path) const;
    static LdaModel load(const std::filesystem::path& path);

    bool operator==(const LdaModel&) const = default;

private:
    LdaConfig config_;
    std::vector<std::string> vocab_;       // sorted
    std::vector<std::uint32_t> counts_;    // word-major: counts_[w * K + k]
    std::vector<std::uint64_t> totals_;    // per topic
};

}  // namespace kgi
