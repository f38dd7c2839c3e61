#include "kgi/features.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "kgi/errors.hpp"
#include "kgi/random.hpp"
#include "kgi/text.hpp"

namespace kgi {

using nlohmann::json;

Eigen::VectorXd embed_text(EmbeddingProvider& provider, std::string_view text) {
    if (text::trim(text).empty()) throw ArgumentError("cannot embed empty text");
    auto out = provider.embed_batch({std::string(text)});
    return std::move(out.at(0));
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension, std::uint64_t seed)
    : dim_(dimension), seed_(seed) {
    if (dim_ == 0) throw ArgumentError("embedding dimension must be at least 1");
}

Eigen::VectorXd HashEmbeddingProvider::embed_one(std::string_view text) const {
    const std::uint64_t key = rng::derive(seed_, text::fnv1a64(text::normalize_label(text)));
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < dim_; ++i) v[static_cast<Eigen::Index>(i)] = rng::normal_at(key, i);
    return v / v.norm();
}

std::vector<Eigen::VectorXd> HashEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (text::trim(t).empty()) throw ArgumentError("cannot embed empty text");
        out.push_back(embed_one(t));
    }
    return out;
}

std::string HashEmbeddingProvider::describe() const {
    return "hash(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

ServiceEmbeddingProvider::ServiceEmbeddingProvider(EmbeddingServiceConfig config)
    : config_(std::move(config)), transport_(http::make_transport(config_.base_url, config_.timeout_seconds)) {}

ServiceEmbeddingProvider::ServiceEmbeddingProvider(EmbeddingServiceConfig config,
                                                   std::unique_ptr<http::Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.batch_size == 0) throw ArgumentError("embedding batch size must be at least 1");
}

std::string ServiceEmbeddingProvider::describe() const {
    return "service(url=" + config_.base_url + config_.endpoint + ",dim=" + std::to_string(config_.dimension) +
           ",max_chars=" + std::to_string(config_.max_chars) + ")";
}

std::vector<Eigen::VectorXd> ServiceEmbeddingProvider::request(const std::vector<std::string>& texts) {
    json body;
    body["texts"] = texts;
    http::Headers headers;
    if (auto key = http::env_value(config_.api_key_env)) headers.emplace_back("Authorization", "Bearer " + *key);
    http::Response response;
    {
        std::lock_guard lock(request_mutex_);
        response = http::with_retries({config_.max_retries, config_.backoff_base_ms}, "embedding request", [&] {
            return transport_->post(config_.endpoint, body.dump(), "application/json", headers);
        });
    }
    json j;
    try {
        j = json::parse(response.body);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("embedding service returned non-JSON: ") + e.what(), "<body>");
    }
    if (!j.contains("vectors") || !j["vectors"].is_array()) {
        throw ParseError("embedding response lacks a 'vectors' array", "vectors");
    }
    const auto& rows = j["vectors"];
    if (rows.size() != texts.size()) {
        throw ParseError("embedding service returned " + std::to_string(rows.size()) + " vectors for " +
                             std::to_string(texts.size()) + " texts",
                         "vectors");
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != config_.dimension) {
            throw ParseError("embedding dimension mismatch: expected " + std::to_string(config_.dimension) + ", got " +
                                 std::to_string(row.is_array() ? row.size() : 0),
                             "vectors[]");
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!row[i].is_number()) throw ParseError("non-numeric embedding entry", "vectors[][]");
            v[static_cast<Eigen::Index>(i)] = row[i].get<double>();
            if (!std::isfinite(v[static_cast<Eigen::Index>(i)])) throw NumericError("embedding service returned a non-finite value");
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Eigen::VectorXd> ServiceEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += config_.batch_size) {
        const std::size_t end = std::min(texts.size(), begin + config_.batch_size);
        std::vector<std::string> batch;
        batch.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            if (text::trim(texts[i]).empty()) throw ArgumentError("cannot embed empty text");
            if (text::codepoint_count(texts[i]) > config_.max_chars) {
                const auto cp = text::codepoint_offsets(texts[i]);
                batch.push_back(text::slice_codepoints(texts[i], cp, 0, config_.max_chars));
                if (truncated_++ == 0) {
                    spdlog::warn("embedding input truncated to {} characters (further truncations counted silently)",
                                 config_.max_chars);
                }
            } else {
                batch.push_back(texts[i]);
            }
        }
        for (auto& v : request(batch)) out.push_back(std::move(v));
    }
    return out;
}

CachedEmbeddingProvider::CachedEmbeddingProvider(EmbeddingProvider& inner,
                                                 std::optional<std::filesystem::path> disk_cache)
    : inner_(inner), disk_cache_(std::move(disk_cache)) {
    if (!disk_cache_ || !std::filesystem::exists(*disk_cache_)) return;
    std::ifstream in(*disk_cache_, std::ios::binary);
    if (!in) throw Error("cannot read embedding cache " + disk_cache_->string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const auto values = j.at("v").get<std::vector<double>>();
            if (values.size() != inner_.dimension()) {
                throw ParseError("cached vector has dimension " + std::to_string(values.size()) + ", provider uses " +
                                 std::to_string(inner_.dimension()),
                                 "v");
            }
            cache_.insert_or_assign(j.at("key").get<std::string>(),
                                    Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
        } catch (const json::exception& e) {
            throw ParseError(disk_cache_->string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::vector<Eigen::VectorXd> CachedEmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<std::string> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) {
        std::string key = text::normalize_label(t);
        if (key.empty()) throw ArgumentError("cannot embed empty text");
        keys.push_back(std::move(key));
    }

    std::vector<Eigen::VectorXd> out(texts.size());
    std::vector<std::string> missing;
    {
        std::shared_lock lock(mutex_);
        std::unordered_map<std::string, bool> queued;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            auto it = cache_.find(keys[i]);
            if (it != cache_.end()) {
                out[i] = it->second;
                ++hits_;
            } else if (queued.emplace(keys[i], true).second) {
                missing.push_back(keys[i]);
            }
        }
    }
    if (missing.empty()) return out;

    misses_ += missing.size();
    auto fresh = inner_.embed_batch(missing);
    std::unique_lock lock(mutex_);
    for (std::size_t k = 0; k < missing.size(); ++k) {
        if (cache_.emplace(missing[k], std::move(fresh[k])).second) unflushed_.push_back(missing[k]);
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (out[i].size() == 0) out[i] = cache_.at(keys[i]);
    }
    return out;
}

void CachedEmbeddingProvider::flush() {
    if (!disk_cache_) return;
    std::unique_lock lock(mutex_);
    if (unflushed_.empty()) return;
    if (disk_cache_->has_parent_path()) std::filesystem::create_directories(disk_cache_->parent_path());
    std::ofstream out(*disk_cache_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot write embedding cache " + disk_cache_->string());
    for (const auto& key : unflushed_) {
        const auto& v = cache_.at(key);
        json j;
        j["key"] = key;
        j["v"] = std::vector<double>(v.data(), v.data() + v.size());
        out << j.dump() << '\n';
    }
    unflushed_.clear();
}

std::size_t CachedEmbeddingProvider::size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

Eigen::MatrixXd featurize_graph(EmbeddingProvider& provider, const DocumentGraph& graph) {
    if (graph.nodes.empty()) throw ArgumentError("graph '" + graph.doc_id + "' has no nodes to featurize");
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        if (text::trim(graph.nodes[i]).empty()) {
            throw ArgumentError("graph '" + graph.doc_id + "', node " + std::to_string(i) + ": empty label");
        }
    }
    std::vector<Eigen::VectorXd> rows;
    try {
        rows = provider.embed_batch(graph.nodes);
    } catch (const Error& e) {
        throw Error("featurizing graph '" + graph.doc_id + "': " + e.what());
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(provider.dimension()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != x.cols()) {
            throw NumericError("graph '" + graph.doc_id + "', node " + std::to_string(i) + " ('" + graph.nodes[i] +
                               "'): embedding dimension mismatch");
        }
        x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return x;
}

}  // namespace kgi
