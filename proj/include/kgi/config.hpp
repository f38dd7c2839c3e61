#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgi/baselines.hpp"
#include "kgi/encoder.hpp"
#include "kgi/features.hpp"
#include "kgi/kgx.hpp"
#include "kgi/lda.hpp"
#include "kgi/scholar.hpp"
#include "kgi/training.hpp"

namespace kgi {

struct PathsConfig {
    std::filesystem::path corpus_dir = "corpus";
    std::filesystem::path graphs_file = "graphs/graphs.jsonl";
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path output_dir = "out";
    std::filesystem::path sidecar_dir = "sidecars";  // mock extractor input
};

struct IngestConfig {
    ScholarConfig api;
    std::vector<std::string> subjects;
    std::size_t limit_per_subject = 900;
};

struct ExtractionConfig {
    std::size_t chunk_size = kDefaultChunkSize;
    std::size_t overlap = kDefaultChunkOverlap;
    std::optional<std::filesystem::path> template_path;  // bundled template when unset
    bool mock = false;
    LlmConfig llm;
};

struct FeaturesConfig {
    std::string provider = "hash";  // hash | service
    std::size_t dimension = kDefaultEmbeddingDim;
    std::uint64_t hash_seed = 0;
    EmbeddingServiceConfig service;
    bool disk_cache = true;
};

struct SamplingConfig {
    std::int64_t n_positive = 8500;
    std::optional<std::int64_t> n_negative;  // default: n_positive * 13500 / 8500
};

struct BaselinesConfig {
    std::size_t min_ngram = kDefaultMinNgram;
    LdaConfig lda;
    KlDirection kl_direction = KlDirection::Symmetric;
    std::size_t doc_chunk_size = kDocEmbeddingChunk;
};

// The whole pipeline configuration. One JSON file; every section and key is
// optional, unknown keys are errors, relative paths resolve against the
// directory holding the file.
struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    PathsConfig paths;
    IngestConfig ingest;
    ExtractionConfig extraction;
    FeaturesConfig features;
    EncoderConfig encoder;
    TrainConfig training;
    SamplingConfig sampling;
    BaselinesConfig baselines;

    // Pushes the master seed and job count into the per-module configs.
    void apply_seed(std::uint64_t s);
    void apply_jobs(std::size_t j);
    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical JSON of the effective configuration (defaults filled in).
std::string run_config_json(const RunConfig& config);

// Writes <dir>/config.json.
void echo_config(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace kgi
