#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgi/corpus.hpp"
#include "kgi/kgx.hpp"
#include "kgi/pairs.hpp"

namespace kgi {

// Planted-motif benchmark. Every pair gets its own two documents. A positive
// pair shares one concept motif (the same labels and edges); a negative pair
// carries two independently drawn motifs. Motif concepts come from a pool
// shared by the whole corpus, so held-out pairs reuse concepts seen in
// training. Each document also gets filler nodes from a separate shared
// vocabulary.
struct SyntheticConfig {
    std::size_t pairs = 250;
    double positive_share = 8500.0 / 22000.0;
    std::size_t motif_size = 10;
    std::size_t concept_pool = 60;
    std::size_t noise_nodes = 1;
    std::size_t noise_vocabulary = 20;
    std::uint64_t seed = 7;
    std::string subject = "synthetic";
};

struct SyntheticDataset {
    Corpus corpus;  // the first document of each positive pair cites the second
    std::vector<DocumentGraph> graphs;
    std::vector<PairSample> pairs;
};

SyntheticDataset make_synthetic_dataset(const SyntheticConfig& config);

// One "<doc_id>.triples" sidecar per graph, readable by mock_extract.
void write_sidecars(const std::vector<DocumentGraph>& graphs, const std::filesystem::path& dir);

}  // namespace kgi
