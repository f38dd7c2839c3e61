#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "kgi/http.hpp"
#include "kgi/kgx.hpp"

namespace kgi {

inline constexpr std::size_t kDefaultEmbeddingDim = 384;

// Produces fixed-dimension vectors for short texts. Implementations must be
// safe for concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) = 0;
    // Stable description of the configuration, recorded with run outputs.
    virtual std::string describe() const = 0;
};

// Rejects text that is empty after trimming.
Eigen::VectorXd embed_text(EmbeddingProvider& provider, std::string_view text);

// Deterministic offline provider. The normalized text is hashed (FNV-1a,
// mixed with the seed) into the key of a counter-based generator that yields
// `dimension` standard normals; the result is scaled to unit length.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dimension = kDefaultEmbeddingDim, std::uint64_t seed = 0);

    std::size_t dimension() const override { return dim_; }
    std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) override;
    std::string describe() const override;

    Eigen::VectorXd embed_one(std::string_view text) const;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

struct EmbeddingServiceConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string endpoint = "/embed";
    std::string api_key_env;
    std::size_t dimension = kDefaultEmbeddingDim;
    std::size_t batch_size = 64;
    std::size_t max_chars = 8192;
    int max_retries = 3;
    int backoff_base_ms = 500;
    double timeout_seconds = 60.0;
};

// Adapter for any sentence-embedding server speaking
//   POST <endpoint> {"texts": [...]}  ->  {"vectors": [[...], ...]}
// Vectors are returned verbatim (no normalization).
class ServiceEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit ServiceEmbeddingProvider(EmbeddingServiceConfig config);
    ServiceEmbeddingProvider(EmbeddingServiceConfig config, std::unique_ptr<http::Transport> transport);

    std::size_t dimension() const override { return config_.dimension; }
    std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) override;
    std::string describe() const override;

    std::size_t truncated_count() const { return truncated_.load(); }

private:
    std::vector<Eigen::VectorXd> request(const std::vector<std::string>& texts);

    EmbeddingServiceConfig config_;
    std::unique_ptr<http::Transport> transport_;
    std::mutex request_mutex_;
    std::atomic<std::size_t> truncated_{0};
};

// Memoizes another provider by normalized text. The inner provider sees the
// normalized key, so a cached vector is a function of the key alone.
// Optional on-disk cache: embeddings.jsonl lines {"key": ..., "v": [...]}.
class CachedEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit CachedEmbeddingProvider(EmbeddingProvider& inner,
                                     std::optional<std::filesystem::path> disk_cache = std::nullopt);

    std::size_t dimension() const override { return inner_.dimension(); }
    std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) override;
    std::string describe() const override { return inner_.describe(); }

    // Appends entries computed since the last flush to the disk cache.
    void flush();
    std::size_t size() const;
    std::size_t hits() const { return hits_.load(); }
    std::size_t misses() const { return misses_.load(); }

private:
    EmbeddingProvider& inner_;
    std::optional<std::filesystem::path> disk_cache_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Eigen::VectorXd> cache_;
    std::vector<std::string> unflushed_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

// Row i holds the embedding of node label i.
Eigen::MatrixXd featurize_graph(EmbeddingProvider& provider, const DocumentGraph& graph);

}  // namespace kgi
